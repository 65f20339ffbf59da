//! Fourier machinery: periodic spectral derivatives on the box and
//! zero-padded free-space convolution with singular radial kernels.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use gauss_quad::GaussLegendre;
use rustfft::num_complex::Complex64;
use statrs::function::gamma::{gamma, gamma_ur};

use crate::error::Result;
#[cfg(test)]
use crate::error::Error;
use crate::fft::NdFft;
use crate::grid::{Field, Grid};
use crate::riesz::riesz_constant;

/// Periodic transform on the unpadded box.
#[derive(Debug, Clone)]
pub struct PeriodicPlan {
    grid: Grid,
    fft: NdFft,
    /// `|k|^2` in storage order, `k = π m / L`, `m ∈ [-n/2, n/2)`.
    k2: Vec<f64>,
}

impl PeriodicPlan {
    pub fn new(grid: Grid) -> Self {
        let n = grid.n();
        let scale = std::f64::consts::PI / grid.half_width();
        let axis_k2: Vec<f64> = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                (scale * m).powi(2)
            })
            .collect();
        let k2 = (0..grid.len())
            .map(|flat| {
                let idx = grid.unravel(flat);
                (0..grid.d()).map(|a| axis_k2[idx[a]]).sum()
            })
            .collect();
        PeriodicPlan { grid, fft: NdFft::new(grid.d(), n), k2 }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn transform(&self, u: &Field) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = u.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.forward(&mut buf, self.grid.n());
        buf
    }

    /// Multiplies the transform of `u` by `symbol(|k|^2)`.
    pub fn apply_symbol(&self, u: &Field, symbol: impl Fn(f64) -> f64) -> Field {
        debug_assert!(u.grid().same_as(&self.grid));
        let mut buf = self.transform(u);
        for (z, &k2) in buf.iter_mut().zip(&self.k2) {
            *z *= symbol(k2);
        }
        self.fft.inverse(&mut buf, self.grid.n());
        let norm = 1.0 / self.grid.len() as f64;
        Field::from_values_unchecked(self.grid, buf.iter().map(|z| z.re * norm).collect())
    }

    /// Spectral Laplacian, symbol `-|k|^2`.
    pub fn laplacian(&self, u: &Field) -> Field {
        self.apply_symbol(u, |k2| -k2)
    }

    /// `(1 - Δ)^{-1} u`.
    pub fn helmholtz_inverse(&self, u: &Field) -> Field {
        self.apply_symbol(u, |k2| 1.0 / (1.0 + k2))
    }

    /// `∫|∇u|^2` as the direct Parseval sum `h^d / n^d Σ |k|^2 |û_k|^2`.
    pub fn dirichlet_energy(&self, u: &Field) -> f64 {
        let buf = self.transform(u);
        let s: f64 = buf.iter().zip(&self.k2).map(|(z, &k2)| k2 * z.norm_sqr()).sum();
        s * self.grid.cell_volume() / self.grid.len() as f64
    }
}

/// Periodic spectral Laplacian of `u`.
pub fn laplacian(u: &Field) -> Field {
    PeriodicPlan::new(*u.grid()).laplacian(u)
}

/// Convolution kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// Normalized Riesz kernel `A_α |x|^{α-d}`, `0 < α < d`.
    Riesz { alpha: f64 },
    /// Kernel sampled on a grid: node `i` holds the value at offset
    /// `(i - n/2) h`; offsets outside `[-n/2, n/2)` are zero.
    Sampled(Field),
}

#[derive(Debug, Clone)]
enum KernelHat {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// Precomputed free-space convolution on a fixed grid, padded to `2n` per
/// axis.
#[derive(Debug, Clone)]
pub struct ConvolutionPlan {
    grid: Grid,
    fft: NdFft,
    hat: KernelHat,
    kernel: KernelSpec,
}

impl ConvolutionPlan {
    pub fn new(grid: Grid, kernel: KernelSpec) -> Result<Self> {
        let d = grid.d();
        let n = grid.n();
        let m = 2 * n;
        let fft = NdFft::new(d, m);
        let offset = |j: usize| -> i64 {
            if j <= n {
                j as i64
            } else {
                j as i64 - m as i64
            }
        };
        let sample: Box<dyn Fn([i64; 3]) -> f64> = match &kernel {
            KernelSpec::Riesz { alpha } => {
                let a = riesz_constant(d, *alpha)?;
                let s = alpha - d as f64;
                let origin = a * grid.h().powf(s) * origin_weight(d, *alpha);
                let h = grid.h();
                Box::new(move |o| {
                    let r2: i64 = o.iter().take(d).map(|v| v * v).sum();
                    if r2 == 0 {
                        origin
                    } else {
                        a * (h * (r2 as f64).sqrt()).powf(s)
                    }
                })
            }
            KernelSpec::Sampled(field) => {
                grid.check_same(field.grid())?;
                let field = field.clone();
                let half = (n / 2) as i64;
                Box::new(move |o| {
                    let mut flat = 0usize;
                    for &oa in o.iter().take(d) {
                        if oa < -half || oa >= half {
                            return 0.0;
                        }
                        flat = flat * n + (oa + half) as usize;
                    }
                    field.values()[flat]
                })
            }
        };
        let mut buf = vec![Complex64::default(); fft.len()];
        for (flat, z) in buf.iter_mut().enumerate() {
            let mut rest = flat;
            let mut o = [0i64; 3];
            for a in (0..d).rev() {
                o[a] = offset(rest % m);
                rest /= m;
            }
            *z = Complex64::new(sample(o), 0.0);
        }
        fft.forward(&mut buf, m);
        let vol = grid.cell_volume();
        let hat = match kernel {
            KernelSpec::Riesz { .. } => KernelHat::Real(buf.iter().map(|z| z.re * vol).collect()),
            KernelSpec::Sampled(_) => KernelHat::Complex(buf.iter().map(|z| z * vol).collect()),
        };
        Ok(ConvolutionPlan { grid, fft, hat, kernel })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    fn embed(&self, buf: &mut [Complex64], f: &Field, imaginary: bool) {
        let n = self.grid.n();
        let m = 2 * n;
        let d = self.grid.d();
        for (flat, &v) in f.values().iter().enumerate() {
            let idx = self.grid.unravel(flat);
            let p = (0..d).fold(0usize, |acc, a| acc * m + idx[a]);
            if imaginary {
                buf[p].im = v;
            } else {
                buf[p].re = v;
            }
        }
    }

    fn extract(&self, buf: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.grid.n();
        let m = 2 * n;
        let d = self.grid.d();
        let norm = 1.0 / self.fft.len() as f64;
        let mut re = Vec::with_capacity(self.grid.len());
        let mut im = Vec::with_capacity(self.grid.len());
        for flat in 0..self.grid.len() {
            let idx = self.grid.unravel(flat);
            let p = (0..d).fold(0usize, |acc, a| acc * m + idx[a]);
            re.push(buf[p].re * norm);
            im.push(buf[p].im * norm);
        }
        (re, im)
    }

    fn convolve_buffer(&self, buf: &mut [Complex64]) {
        let n = self.grid.n();
        self.fft.forward(buf, n);
        match &self.hat {
            KernelHat::Real(hat) => buf.iter_mut().zip(hat).for_each(|(z, &k)| *z *= k),
            KernelHat::Complex(hat) => buf.iter_mut().zip(hat).for_each(|(z, k)| *z *= k),
        }
        self.fft.inverse(buf, n);
    }

    /// Aperiodic convolution of `f` with the kernel, restricted to the box.
    pub fn apply(&self, f: &Field) -> Result<Field> {
        self.grid.check_same(f.grid())?;
        let mut buf = vec![Complex64::default(); self.fft.len()];
        self.embed(&mut buf, f, false);
        self.convolve_buffer(&mut buf);
        let (re, _) = self.extract(&buf);
        Ok(Field::from_values_unchecked(self.grid, re))
    }

    /// Convolves two fields with one transform pair when the kernel is even
    /// (real transform); falls back to two passes otherwise.
    pub fn apply_pair(&self, f: &Field, g: &Field) -> Result<(Field, Field)> {
        self.grid.check_same(f.grid())?;
        self.grid.check_same(g.grid())?;
        if let KernelHat::Complex(_) = self.hat {
            return Ok((self.apply(f)?, self.apply(g)?));
        }
        let mut buf = vec![Complex64::default(); self.fft.len()];
        self.embed(&mut buf, f, false);
        self.embed(&mut buf, g, true);
        self.convolve_buffer(&mut buf);
        let (re, im) = self.extract(&buf);
        Ok((
            Field::from_values_unchecked(self.grid, re),
            Field::from_values_unchecked(self.grid, im),
        ))
    }
}

/// Free-space convolution of `f` with `kernel`. Logs a warning when `f` has
/// not decayed at the box boundary.
pub fn convolve_free(f: &Field, kernel: &KernelSpec) -> Result<Field> {
    let decay = boundary_decay(f);
    if decay > 1e-8 {
        log::warn!("convolve_free: boundary/max ratio {decay:.3e} exceeds 1e-8");
    }
    ConvolutionPlan::new(*f.grid(), kernel.clone())?.apply(f)
}

/// `max |f|` over the outermost node shell divided by `max |f|` (0 for the
/// zero field).
pub fn boundary_decay(f: &Field) -> f64 {
    let g = f.grid();
    let peak = f.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    let n = g.n();
    let edge = (0..g.len())
        .filter(|&i| {
            let idx = g.unravel(i);
            (0..g.d()).any(|a| idx[a] == 0 || idx[a] == n - 1)
        })
        .fold(0.0_f64, |m, i| m.max(f.values()[i].abs()));
    edge / peak
}

/// Sample of `A_α |x|^{α-d}` at the lattice offset `o h`; the origin holds
/// `A_α h^{α-d} w₀` with `w₀` from [`origin_weight`].
pub fn riesz_kernel_sample(grid: &Grid, alpha: f64, o: [i64; 3]) -> f64 {
    let d = grid.d();
    let a = riesz_constant(d, alpha).expect("alpha validated by caller");
    let s = alpha - d as f64;
    let r2: i64 = o.iter().take(d).map(|v| v * v).sum();
    if r2 == 0 {
        a * grid.h().powf(s) * origin_weight(d, alpha)
    } else {
        a * (grid.h() * (r2 as f64).sqrt()).powf(s)
    }
}

fn cell_mean_cache() -> &'static Mutex<HashMap<(usize, u64), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn zeta_cache() -> &'static Mutex<HashMap<(usize, u64), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Epstein zeta function of the cubic lattice,
/// `Z_d(σ) = Σ_{j ∈ Z^d, j ≠ 0} |j|^{-σ}`, analytically continued to
/// `0 < σ < d` through the theta-function split
///
/// ```text
/// π^{-σ/2} Γ(σ/2) Z_d(σ) = Σ' [ Γ(σ/2, π|j|²) (π|j|²)^{-σ/2}
///                              + Γ((d-σ)/2, π|j|²) (π|j|²)^{-(d-σ)/2} ]
///                          + 2/(σ-d) - 2/σ.
/// ```
pub fn lattice_zeta(d: usize, sigma: f64) -> f64 {
    let key = (d, sigma.to_bits());
    if let Some(v) = zeta_cache().lock().unwrap().get(&key) {
        return *v;
    }
    let nf = d as f64;
    let (a1, a2) = (0.5 * sigma, 0.5 * (nf - sigma));
    let (g1, g2) = (gamma(a1), gamma(a2));
    const R: i64 = 6;
    let side = (2 * R + 1) as usize;
    let mut acc = 0.0;
    for flat in 0..side.pow(d as u32) {
        let mut rest = flat;
        let mut n2 = 0i64;
        for _ in 0..d {
            let j = (rest % side) as i64 - R;
            rest /= side;
            n2 += j * j;
        }
        if n2 == 0 {
            continue;
        }
        let x = std::f64::consts::PI * n2 as f64;
        acc += g1 * gamma_ur(a1, x) * x.powf(-a1) + g2 * gamma_ur(a2, x) * x.powf(-a2);
    }
    acc += 2.0 / (sigma - nf) - 2.0 / sigma;
    let v = acc * std::f64::consts::PI.powf(a1) / g1;
    zeta_cache().lock().unwrap().insert(key, v);
    v
}

/// Origin weight `w₀ = -Z_d(d-α)` of the corrected trapezoidal rule
/// `∫ |y|^{α-d} g(y) dy ≈ h^d Σ_{j≠0} |jh|^{α-d} g(jh) + h^α w₀ g(0)`,
/// whose error is `O(h^{α+2})` for smooth `g`.
pub fn origin_weight(d: usize, alpha: f64) -> f64 {
    -lattice_zeta(d, d as f64 - alpha)
}

/// `∫_{[-1/2,1/2]^d} |y|^{α-d} dy`.
///
/// Splitting the cube into `2d` pyramids over its faces and integrating the
/// radial variable exactly gives
/// `(d/α) ∫_{[-1/2,1/2]^{d-1}} (1/4 + |y|^2)^{(α-d)/2} dy`, whose integrand
/// is smooth; the remaining integral uses tensor Gauss-Legendre.
pub fn unit_cell_mean(d: usize, alpha: f64) -> f64 {
    let key = (d, alpha.to_bits());
    if let Some(v) = cell_mean_cache().lock().unwrap().get(&key) {
        return *v;
    }
    let s = alpha - d as f64;
    let face = |y2: f64| (0.25 + y2).powf(0.5 * s);
    let rule: Vec<(f64, f64)> = GaussLegendre::new(40).expect("valid degree").into_iter().collect();
    let face_integral = match d {
        1 => face(0.0),
        2 => rule.iter().map(|&(y, w)| 0.5 * w * face(0.25 * y * y)).sum(),
        _ => {
            let mut acc = 0.0;
            for &(y, wy) in &rule {
                for &(z, wz) in &rule {
                    acc += 0.25 * wy * wz * face(0.25 * (y * y + z * z));
                }
            }
            acc
        }
    };
    let v = d as f64 / alpha * face_integral;
    cell_mean_cache().lock().unwrap().insert(key, v);
    v
}
