//! Slow reference implementations shared by the integration tests.
#![allow(dead_code)]

use choquard::classify::Verdict;
use choquard::spectral::riesz_kernel_sample;
use choquard::{Field, Grid, KSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `A_α` for 20 `(d, α)` pairs, evaluated in 30-digit arithmetic.
pub const RIESZ_CONSTANTS: [(usize, f64, f64); 20] = [
    (1, 0.25, 0.14927036108294766127),
    (1, 0.5, 0.39894228040143267794),
    (1, 0.75, 1.0662193213524481036),
    (2, 0.25, 0.038713134981761385481),
    (2, 0.5, 0.076074279862467707967),
    (2, 1.0, 0.15915494309189533577),
    (2, 1.5, 0.33296793550170026196),
    (2, 1.75, 0.65430753470412834722),
    (3, 0.25, 0.01781783686759740244),
    (3, 0.5, 0.031746817967120484893),
    (3, 1.0, 0.050660591821168885722),
    (3, 1.5, 0.063493635934240969786),
    (3, 2.0, 0.079577471545947667884),
    (3, 2.5, 0.12698727186848193957),
    (3, 2.75, 0.22625876721777085784),
    (3, 0.1, 0.0076220544053315076358),
    (3, 1.2, 0.056093851926865391984),
    (3, 2.9, 0.52891800422337612312),
    (3, 0.9, 0.047602620380103890902),
    (3, 2.2, 0.091129986643053666624),
];

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels + panels % 2;
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// `φ(r) = (1/r) ∫_0^r s² f(s) ds + ∫_r^R s f(s) ds`, the potential of a
/// radial density supported in `[0, R]` in three dimensions, by composite
/// Simpson with `points` nodes per piece.
pub fn newtonian_potential_radial_raw(f: &dyn Fn(f64) -> f64, r: f64, r_max: f64, points: usize) -> f64 {
    let inner = if r > 0.0 { simpson(&|s| s * s * f(s), 0.0, r, points) / r } else { 0.0 };
    let outer = if r < r_max { simpson(&|s| s * f(s), r, r_max, points) } else { 0.0 };
    inner + outer
}

/// As [`newtonian_potential_radial_raw`] with `10^4` nodes, checked against a
/// doubled resolution before use.
pub fn newtonian_potential_radial(f: &dyn Fn(f64) -> f64, r: f64, r_max: f64) -> f64 {
    let coarse = newtonian_potential_radial_raw(f, r, r_max, 10_000);
    let fine = newtonian_potential_radial_raw(f, r, r_max, 20_000);
    let scale = fine.abs().max(1e-300);
    assert!(
        (coarse - fine).abs() <= 1e-8 * scale || fine == 0.0 && coarse == 0.0,
        "radial oracle not self-converged at r = {r}: {coarse} vs {fine}"
    );
    fine
}

/// `Σ_y K(x - y) f(y) h^d` with the library's kernel samples; `n <= 16`.
pub fn direct_convolution_smallgrid(f: &Field, alpha: f64) -> Result<Field, String> {
    let g: Grid = *f.grid();
    if g.n() > 16 {
        return Err(format!("direct sum limited to n <= 16, got {}", g.n()));
    }
    let d = g.d();
    let idx: Vec<[usize; 3]> = (0..g.len()).map(|i| g.unravel(i)).collect();
    let vol = g.cell_volume();
    let vals = f.values();
    let mut out = vec![0.0; g.len()];
    for (i, xi) in idx.iter().enumerate() {
        let mut acc = 0.0;
        for (j, yj) in idx.iter().enumerate() {
            if vals[j] == 0.0 {
                continue;
            }
            let mut o = [0i64; 3];
            for a in 0..d {
                o[a] = xi[a] as i64 - yj[a] as i64;
            }
            acc += riesz_kernel_sample(&g, alpha, o) * vals[j];
        }
        out[i] = acc * vol;
    }
    Field::from_values(g, out).map_err(|e| e.to_string())
}

pub fn gaussian(g: Grid, sigma: f64) -> Field {
    Field::from_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2.0 * sigma * sigma)).exp())
}

pub fn radius(x: &[f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

pub fn rel_linf(a: &Field, b: &Field) -> f64 {
    a.axpy(-1.0, b).max_abs() / b.max_abs()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sum of three anisotropic Gaussian bumps with random centres, widths and
/// signed amplitudes.
pub fn random_smooth(g: Grid, rng: &mut ChaCha8Rng) -> Field {
    let bumps: Vec<([f64; 3], [f64; 3], f64)> = (0..3)
        .map(|_| {
            let c = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let w = [rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5)];
            (c, w, rng.gen_range(-1.0..1.0))
        })
        .collect();
    Field::from_fn(g, |x| {
        bumps
            .iter()
            .map(|(c, w, a)| {
                let e: f64 = (0..g.d()).map(|k| ((x[k] - c[k]) / w[k]).powi(2)).sum();
                a * (-e).exp()
            })
            .sum()
    })
}

/// Same as [`random_smooth`] with positive amplitudes.
pub fn random_positive(g: Grid, rng: &mut ChaCha8Rng) -> Field {
    let f = random_smooth(g, rng);
    let scale: f64 = rng.gen_range(0.05..5.0);
    f.map(|v| scale * v.abs())
}

pub fn c1() -> KSpec {
    KSpec::constant(1.0).unwrap()
}

pub fn pd(kappa: f64, gamma: f64) -> KSpec {
    KSpec::power_decay(kappa, gamma).unwrap()
}

use Verdict::{ExistenceRegime as EX, HypothesesUnavailable as NA, NonexistenceI as N1, NonexistenceIi as N2, Undetermined as UN};

/// Hand-evaluated verdicts: `(N, α, p, q, γ, K, expected)`.
pub fn truth_table() -> Vec<(usize, f64, f64, f64, f64, KSpec, Verdict)> {
    vec![
        // Constant K, γ = 0. N = 3, α = 2: (N+α)/(N-2) = 5, (N+α)/N = 5/3.
        (3, 2.0, 5.0, 2.0, 0.0, c1(), N1),
        (3, 2.0, 1.5, 2.0, 0.0, c1(), N2),
        (3, 2.0, 6.0, 2.0, 0.0, c1(), N1),
        (3, 2.0, 5.0, 4.0, 0.0, c1(), N1),
        (3, 2.0, 5.0, 6.0, 0.0, c1(), UN),
        // 5/p = 5/q: the first branch is closed.
        (3, 2.0, 5.0, 5.0, 0.0, c1(), N1),
        // 5/p = 5/q at p = 1.25: the constant-K second branch is strict.
        (3, 2.0, 1.25, 1.25, 0.0, c1(), UN),
        (3, 2.0, 1.25, 1.3, 0.0, c1(), N2),
        // N = 4, α = 2: both window ends exact (1.5 and 3).
        (4, 2.0, 1.5, 2.0, 0.0, c1(), N2),
        (4, 2.0, 3.0, 2.0, 0.0, c1(), N1),
        (3, 2.0, 3.0, 2.0, 0.0, c1(), UN),
        // Constant K, other certificates.
        (3, 2.0, 5.0, 2.0, 1.0, c1(), N1),
        (3, 2.0, 5.0, 2.0, 2.4, c1(), UN),
        (3, 2.0, 6.0, 2.0, 2.5, c1(), UN),
        (3, 2.0, 1.5, 2.0, -1.0, c1(), UN),
        (3, 2.0, 1.5, 3.0, -1.0, c1(), N2),
        // 5/1.25 = 6/1.5: non-strict when γ = -1/2.
        (3, 2.0, 1.25, 1.5, -0.5, c1(), N2),
        (3, 2.0, 5.0, 2.0, -1.0, c1(), UN),
        // Power decay, existence window; r = 2 at q = 2.
        (3, 2.0, 3.0, 2.0, 2.0, pd(0.1, 2.0), EX),
        (3, 2.0, 3.0, 2.0, 2.0, pd(0.1, 1.0), UN),
        (3, 2.0, 3.0, 1.5, 1.0, pd(1.0, 1.0), UN),
        // γ₀ r = 3 = N is excluded, 3.2 is inside.
        (3, 2.0, 3.0, 2.0, 1.5, pd(1.0, 1.5), UN),
        (3, 2.0, 3.0, 2.0, 1.6, pd(1.0, 1.6), EX),
        (3, 2.0, 2.0, 3.0, 2.0, pd(1.0, 2.0), UN),
        (3, 2.0, 2.5, 2.5, 2.0, pd(1.0, 2.0), UN),
        // Power decay, nonexistence.
        (3, 2.0, 5.0, 2.0, 2.0, pd(1.0, 2.0), UN),
        (3, 2.0, 5.0, 2.0, 0.5, pd(1.0, 0.5), N1),
        (3, 2.0, 5.0, 2.0, 1.0, pd(1.0, 0.5), N1),
        (3, 2.0, 5.0, 2.0, 0.25, pd(1.0, 0.5), UN),
        (3, 2.0, 1.5, 2.0, -1.0, pd(1.0, -1.0), UN),
        (3, 2.0, 1.5, 3.0, -1.0, pd(1.0, -1.0), N2),
        (3, 2.0, 1.5, 3.0, -0.5, pd(1.0, -1.0), UN),
        (3, 2.0, 1.25, 1.25, 0.0, pd(1.0, 0.0), N2),
        // Vanishing K.
        (3, 2.0, 5.0, 9.0, 0.0, KSpec::zero(), N1),
        (3, 2.0, 1.5, 9.0, 0.0, KSpec::zero(), N2),
        (3, 2.0, 3.0, 2.0, 0.0, KSpec::zero(), EX),
        (3, 2.0, 3.0, 3.0, 0.0, KSpec::zero(), UN),
        (3, 2.0, 3.0, 2.0, 0.0, KSpec::constant(0.0).unwrap(), EX),
        // Outside the hypotheses.
        (2, 1.0, 3.0, 2.0, 0.0, c1(), NA),
        (3, 3.0, 3.0, 2.0, 0.0, c1(), NA),
        (3, 0.0, 3.0, 2.0, 0.0, c1(), NA),
        (3, 2.0, 1.0, 2.0, 0.0, c1(), NA),
        // Other (N, α).
        (3, 1.0, 4.0, 2.0, 0.0, c1(), N1),
        (3, 1.0, 1.25, 1.2, 0.0, c1(), UN),
        (5, 1.0, 2.0, 1.5, 0.0, c1(), N1),
        (5, 1.0, 1.8, 1.5, 2.0, pd(1.0, 2.0), EX),
    ]
}
