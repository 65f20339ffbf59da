//! Uniform box discretization of `[-L, L)^d`, sampled fields, node-sum
//! quadrature and the coefficient family `K`.

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::spectral::PeriodicPlan;

/// Cubic grid with `n` nodes per axis on `[-L, L)`, periodic identification
/// of the two faces. Node `i` sits at `-L + i h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    d: usize,
    n: usize,
    half_width: f64,
    h: f64,
}

impl Grid {
    /// Builds a grid; rejects `d` outside `{1,2,3}`, odd `n`, `n < 8` and
    /// non-positive `L`.
    pub fn new(d: usize, n: usize, half_width: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::Discretization(format!("d = {d} not in {{1,2,3}}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::Discretization(format!("n = {n} must be even and >= 8")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Discretization(format!("L = {half_width} must be positive")));
        }
        let h = 2.0 * half_width / n as f64;
        // Store L = h n / 2 so that h * n == 2 L holds bit-exactly.
        let half_width = h * n as f64 / 2.0;
        Ok(Grid { d, n, half_width, h })
    }

    /// Rebuilds a grid from stored `L` and `h`, keeping their bits.
    pub(crate) fn from_stored(d: usize, n: usize, half_width: f64, h: f64) -> Result<Self> {
        let g = Grid::new(d, n, half_width)?;
        if !(h.is_finite() && (h - g.h).abs() <= 1e-12 * g.h) {
            return Err(Error::Discretization(format!("h = {h} inconsistent with 2L/n = {}", g.h)));
        }
        Ok(Grid { d, n, half_width, h })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Half-width `L` of the box.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of nodes, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell volume `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.d as i32)
    }

    /// Coordinate of node `i` along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h
    }

    /// Flat index of the node at the origin.
    pub fn origin_index(&self) -> usize {
        let c = self.n / 2;
        (0..self.d).fold(0, |acc, _| acc * self.n + c)
    }

    /// Per-axis indices of a flat index (last axis fastest). Unused axes are 0.
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for a in (0..self.d).rev() {
            idx[a] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    /// Coordinates of a flat index. Unused axes are 0.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut x = [0.0; 3];
        for a in 0..self.d {
            x[a] = self.coord(idx[a]);
        }
        x
    }

    /// Iterator over node coordinates in storage order.
    pub fn points(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// True when the two grids describe the same node set.
    pub fn same_as(&self, other: &Grid) -> bool {
        self.d == other.d
            && self.n == other.n
            && self.half_width.to_bits() == other.half_width.to_bits()
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(d={}, n={}, L={}) vs (d={}, n={}, L={})",
                self.d, self.n, self.half_width, other.d, other.n, other.half_width
            )))
        }
    }
}

/// Convenience constructor mirroring [`Grid::new`].
pub fn make_grid(d: usize, n: usize, half_width: f64) -> Result<Grid> {
    Grid::new(d, n, half_width)
}

/// A real function sampled at the nodes of a [`Grid`], row-major with the
/// last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Field { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Field { grid, values: vec![c; grid.len()] }
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64; 3]) -> f64) -> Self {
        let values = grid.points().map(|x| f(&x)).collect();
        Field { grid, values }
    }

    /// Wraps raw values; rejects wrong length and non-finite entries.
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!("non-finite value at node {i}")));
        }
        Ok(Field { grid, values })
    }

    pub(crate) fn from_values_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Nodewise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        debug_assert!(self.grid.same_as(&other.grid));
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Field { grid: self.grid, values }
    }

    pub fn scaled(&self, t: f64) -> Field {
        self.map(|v| t * v)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Field) -> Field {
        self.zip_map(other, |a, b| a + s * b)
    }

    /// `L^2` inner product `integrate(self * other)`.
    pub fn dot(&self, other: &Field) -> f64 {
        debug_assert!(self.grid.same_as(&other.grid));
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        s * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Node-sum quadrature `h^d * sum(values)`.
pub fn integrate(f: &Field) -> f64 {
    f.values.iter().sum::<f64>() * f.grid.cell_volume()
}

/// `||u||_{H^1}^2 = -∫ u Δu + ∫ u^2` with the spectral Laplacian.
pub fn norm_h1_sq(u: &Field) -> f64 {
    let plan = PeriodicPlan::new(*u.grid());
    let lap = plan.laplacian(u);
    u.dot(u) - u.dot(&lap)
}

/// Family of the coupling coefficient `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KFamily {
    Zero,
    Const,
    PowerDecay,
}

impl KFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KFamily::Zero => "zero",
            KFamily::Const => "const",
            KFamily::PowerDecay => "powerdecay",
        }
    }
}

impl std::str::FromStr for KFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" => Ok(KFamily::Zero),
            "const" => Ok(KFamily::Const),
            "powerdecay" => Ok(KFamily::PowerDecay),
            other => Err(Error::Parameter(format!("unknown K family '{other}'"))),
        }
    }
}

/// Coefficient `K`: zero, the constant `kappa`, or
/// `kappa (1 + |x|^2)^(-gamma/2)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KSpec {
    pub family: KFamily,
    pub kappa: f64,
    pub gamma: f64,
}

impl KSpec {
    pub fn zero() -> Self {
        KSpec { family: KFamily::Zero, kappa: 0.0, gamma: 0.0 }
    }

    pub fn constant(kappa: f64) -> Result<Self> {
        KSpec::new(KFamily::Const, kappa, 0.0)
    }

    pub fn power_decay(kappa: f64, gamma: f64) -> Result<Self> {
        KSpec::new(KFamily::PowerDecay, kappa, gamma)
    }

    pub fn new(family: KFamily, kappa: f64, gamma: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::Parameter(format!("kappa = {kappa} must be finite and >= 0")));
        }
        if !gamma.is_finite() {
            return Err(Error::Parameter(format!("gamma = {gamma} must be finite")));
        }
        Ok(match family {
            KFamily::Zero => KSpec::zero(),
            KFamily::Const => KSpec { family, kappa, gamma: 0.0 },
            KFamily::PowerDecay => KSpec { family, kappa, gamma },
        })
    }

    /// True when `K` vanishes identically.
    pub fn is_zero(&self) -> bool {
        self.family == KFamily::Zero || self.kappa == 0.0
    }

    pub fn value(&self, r2: f64) -> f64 {
        match self.family {
            KFamily::Zero => 0.0,
            KFamily::Const => self.kappa,
            KFamily::PowerDecay => self.kappa * (1.0 + r2).powf(-0.5 * self.gamma),
        }
    }

    /// `x . grad K` as a function of `|x|^2`.
    pub fn x_dot_grad(&self, r2: f64) -> f64 {
        match self.family {
            KFamily::Zero | KFamily::Const => 0.0,
            KFamily::PowerDecay => {
                -self.kappa * self.gamma * r2 * (1.0 + r2).powf(-0.5 * self.gamma - 1.0)
            }
        }
    }
}

fn r2_of(x: &[f64; 3]) -> f64 {
    x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
}

/// Samples `K` and the analytic `x . grad K` at the nodes.
pub fn eval_k(spec: &KSpec, grid: &Grid) -> (Field, Field) {
    let k = Field::from_fn(*grid, |x| spec.value(r2_of(x)));
    let xk = Field::from_fn(*grid, |x| spec.x_dot_grad(r2_of(x)));
    (k, xk)
}

/// `||K||_{L^r(R^d)}`: node sum over the box plus the exterior of the box,
/// integrated from the closed form of `K`.
pub fn norm_lr_k(spec: &KSpec, grid: &Grid, r: f64) -> Result<f64> {
    if !(r.is_finite() && r > 1.0) {
        return Err(Error::Parameter(format!("r = {r} must be finite and > 1")));
    }
    if spec.is_zero() {
        return Ok(0.0);
    }
    let d = grid.d();
    match spec.family {
        KFamily::Zero => Ok(0.0),
        KFamily::Const => Err(Error::NotIntegrable(format!(
            "constant K = {} is not in L^{r}",
            spec.kappa
        ))),
        KFamily::PowerDecay => {
            if spec.gamma * r <= d as f64 {
                return Err(Error::NotIntegrable(format!(
                    "gamma * r = {} <= d = {d}",
                    spec.gamma * r
                )));
            }
            let kr = Field::from_fn(*grid, |x| spec.value(r2_of(x)).powf(r));
            let inside = integrate(&kr);
            let decay = spec.gamma * r;
            let profile = |s: f64| spec.kappa.powf(r) * (1.0 + s * s).powf(-0.5 * decay);
            let outside = exterior_radial_integral(d, grid.half_width(), decay - d as f64, profile);
            Ok((inside + outside).powf(1.0 / r))
        }
    }
}

/// `∫_{R^d \ [-L,L]^d} F(|x|) dx` for a radial profile decaying at least like
/// `s^{-(d + excess)}`.
///
/// The exterior splits into `2d` face pyramids; on the pyramid over the face
/// `x_1 = L` the substitution `x = τ L (1, y)` reduces the integral to
/// `∫_{[-1,1]^{d-1}} ρ(y)^{-d} T(L ρ(y)) dy` with `ρ = sqrt(1 + |y|^2)` and the
/// radial tail `T(R) = ∫_R^∞ F(s) s^{d-1} ds`.
pub(crate) fn exterior_radial_integral(
    d: usize,
    half_width: f64,
    excess: f64,
    profile: impl Fn(f64) -> f64,
) -> f64 {
    let gl = GaussLegendre::new(24).expect("valid degree");
    let rule: Vec<(f64, f64)> = gl.into_iter().collect();
    // T(R) with s = R e^w, integrand decays like e^{-excess w}.
    let w_max = (45.0 / excess).min(2.0e4);
    let panels = (w_max.ceil() as usize).max(8);
    let dw = w_max / panels as f64;
    let tail = |radius: f64| -> f64 {
        let mut acc = 0.0;
        for k in 0..panels {
            let a = k as f64 * dw;
            for &(x, wt) in &rule {
                let w = a + 0.5 * dw * (x + 1.0);
                let s = radius * w.exp();
                acc += 0.5 * dw * wt * profile(s) * s.powi(d as i32);
            }
        }
        acc
    };
    let faces = 2.0 * d as f64;
    match d {
        1 => faces * tail(half_width),
        2 => {
            let mut acc = 0.0;
            for &(y, wy) in &rule {
                let rho = (1.0 + y * y).sqrt();
                acc += wy * rho.powi(-2) * tail(half_width * rho);
            }
            faces * acc
        }
        _ => {
            let mut acc = 0.0;
            for &(y, wy) in &rule {
                for &(z, wz) in &rule {
                    let rho = (1.0 + y * y + z * z).sqrt();
                    acc += wy * wz * rho.powi(-3) * tail(half_width * rho);
                }
            }
            faces * acc
        }
    }
}

/// One row of a shell average.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ProfileRow {
    pub r: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// Shell statistics in bins of width `h` over `0 <= |x| < L`; `r` is the bin
/// centre. Empty bins and nodes outside the inscribed ball are dropped.
pub fn radial_profile(f: &Field) -> Vec<ProfileRow> {
    let g = f.grid();
    let h = g.h();
    let nbins = (g.half_width() / h).ceil() as usize;
    let mut sum = vec![0.0; nbins];
    let mut lo = vec![f64::INFINITY; nbins];
    let mut hi = vec![f64::NEG_INFINITY; nbins];
    let mut count = vec![0usize; nbins];
    for (i, x) in g.points().enumerate() {
        let r = r2_of(&x).sqrt();
        if r >= g.half_width() {
            continue;
        }
        let b = ((r / h) as usize).min(nbins - 1);
        let v = f.values()[i];
        sum[b] += v;
        lo[b] = lo[b].min(v);
        hi[b] = hi[b].max(v);
        count[b] += 1;
    }
    (0..nbins)
        .filter(|&b| count[b] > 0)
        .map(|b| ProfileRow {
            r: (b as f64 + 0.5) * h,
            mean: sum[b] / count[b] as f64,
            min: lo[b],
            max: hi[b],
            count: count[b],
        })
        .collect()
}
