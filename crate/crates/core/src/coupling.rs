//! Schrödinger–Poisson coupling `φ_u = I_2 * (K |u|^q)` and the integrals
//! `A(u) = ∫ K φ_u |u|^q`, `B(u) = ∫ φ_u |u|^q x·∇K`,
//! `C(u) = ∫ (I_α * |u|^p) |u|^p`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::problem::Problem;
use crate::riesz::RieszOp;
use crate::spectral::PeriodicPlan;

/// Potential returned by [`solve_phi`].
#[derive(Debug, Clone)]
pub struct Potential {
    pub phi: Field,
    /// `‖-Δφ - K|u|^q‖_2 / ‖K|u|^q‖_2` with the periodic Laplacian; 0 when
    /// the source vanishes.
    pub defect: f64,
    /// Set when the coupling was switched off (`d < 3`, `K ≡ 0`).
    pub disabled: bool,
}

/// `|u|^e` nodewise, with `0^e = 0`.
pub(crate) fn abs_pow(u: &Field, e: f64) -> Field {
    u.map(|v| if v == 0.0 { 0.0 } else { v.abs().powf(e) })
}

/// `sign(u) |u|^e` nodewise.
pub(crate) fn signed_pow(u: &Field, e: f64) -> Field {
    u.map(|v| if v == 0.0 { 0.0 } else { v.signum() * v.abs().powf(e) })
}

/// `φ_u = I_2 * (K |u|^q)`.
pub fn solve_phi(u: &Field, k: &Field, q: f64, riesz2: Option<&RieszOp>) -> Result<Potential> {
    if !(q > 1.0) {
        return Err(Error::Parameter(format!("q = {q} must exceed 1")));
    }
    let grid = *u.grid();
    grid.check_same(k.grid())?;
    let k_zero = k.is_zero();
    let Some(op) = riesz2 else {
        if k_zero {
            return Ok(Potential { phi: Field::zeros(grid), defect: 0.0, disabled: true });
        }
        return Err(Error::Coupling(format!("no I_2 operator available on d = {}", grid.d())));
    };
    if op.alpha() != 2.0 {
        return Err(Error::Parameter(format!("coupling needs alpha = 2, got {}", op.alpha())));
    }
    let source = k.zip_map(&abs_pow(u, q), |a, b| a * b);
    let phi = op.apply(&source)?;
    let src_norm = source.l2_norm();
    let defect = if src_norm == 0.0 {
        0.0
    } else {
        let lap = PeriodicPlan::new(grid).laplacian(&phi);
        lap.zip_map(&source, |l, s| -l - s).l2_norm() / src_norm
    };
    Ok(Potential { phi, defect, disabled: false })
}

/// Bookkeeping integrals at one field.
#[derive(Debug, Clone, Serialize)]
pub struct CouplingState {
    #[serde(skip)]
    pub phi: Field,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub a_h1: f64,
}

/// `A, B, C` and `‖u‖²_{H¹}` for `u`.
pub fn compute_integrals(problem: &Problem, u: &Field) -> Result<CouplingState> {
    let eval = crate::functional::Evaluation::new(problem, u)?;
    Ok(CouplingState { phi: eval.phi().clone(), a: eval.a, b: eval.b, c: eval.c, a_h1: eval.a_h1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, KSpec};
    use crate::problem::ProblemParams;

    fn bump(g: crate::grid::Grid) -> Field {
        Field::from_fn(g, |x| {
            (-(x[0] - 0.3).powi(2) - 0.7 * x[1] * x[1] - (x[2] + 0.2).powi(2)).exp()
                * (1.0 + 0.3 * x[0])
        })
    }

    #[test]
    fn zero_inputs_give_zero_phi() {
        let g = make_grid(3, 12, 4.0).unwrap();
        let op = RieszOp::new(g, 2.0).unwrap();
        let k = Field::constant(g, 1.0);
        let phi = solve_phi(&Field::zeros(g), &k, 2.0, Some(&op)).unwrap();
        assert!(phi.phi.is_zero());
        let phi = solve_phi(&bump(g), &Field::zeros(g), 2.0, Some(&op)).unwrap();
        assert!(phi.phi.is_zero());
    }

    #[test]
    fn phi_scales_like_t_to_q() {
        let g = make_grid(3, 12, 4.0).unwrap();
        let op = RieszOp::new(g, 2.0).unwrap();
        let k = Field::from_fn(g, |x| 1.0 / (1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
        let u = bump(g);
        let base = solve_phi(&u, &k, 2.0, Some(&op)).unwrap().phi;
        let scaled = solve_phi(&u.scaled(2.0), &k, 2.0, Some(&op)).unwrap().phi;
        let err = scaled.axpy(-4.0, &base).max_abs() / scaled.max_abs();
        assert!(err <= 1e-12, "{err}");
        assert!(base.values().iter().all(|&v| v >= -1e-12 * base.max_abs()));
    }

    #[test]
    fn coupling_rules() {
        let g2 = make_grid(2, 8, 2.0).unwrap();
        let u = Field::constant(g2, 1.0);
        let res = solve_phi(&u, &Field::zeros(g2), 2.0, None).unwrap();
        assert!(res.disabled && res.phi.is_zero());
        assert!(matches!(
            solve_phi(&u, &Field::constant(g2, 1.0), 2.0, None),
            Err(Error::Coupling(_))
        ));
        let g3 = make_grid(3, 8, 2.0).unwrap();
        let op1 = RieszOp::new(g3, 1.0).unwrap();
        let u3 = Field::constant(g3, 1.0);
        assert!(solve_phi(&u3, &u3, 2.0, Some(&op1)).is_err());
        let params = ProblemParams::new(1.0, 1.5, 1.2, KSpec::constant(1.0).unwrap());
        assert!(matches!(Problem::new(g2, params), Err(Error::Coupling(_))));
    }

    #[test]
    fn integrals_vanish_at_zero_and_b_vanishes_for_const_k() {
        let g = make_grid(3, 12, 4.0).unwrap();
        let params = ProblemParams::new(2.0, 2.5, 2.0, KSpec::constant(0.5).unwrap());
        let prob = Problem::new(g, params).unwrap();
        let s = compute_integrals(&prob, &Field::zeros(g)).unwrap();
        assert_eq!((s.a, s.b, s.c, s.a_h1), (0.0, 0.0, 0.0, 0.0));
        let s = compute_integrals(&prob, &bump(g)).unwrap();
        assert_eq!(s.b, 0.0);
        assert!(s.a > 0.0 && s.c > 0.0 && s.a_h1 > 0.0);
    }

    #[test]
    fn integrals_homogeneity() {
        let g = make_grid(3, 12, 4.0).unwrap();
        let (p, q) = (2.5, 1.5);
        let params = ProblemParams::new(2.0, p, q, KSpec::power_decay(0.5, 2.0).unwrap());
        let prob = Problem::new(g, params).unwrap();
        let u = bump(g);
        let t: f64 = 1.7;
        let s1 = compute_integrals(&prob, &u).unwrap();
        let s2 = compute_integrals(&prob, &u.scaled(t)).unwrap();
        let rel = |a: f64, b: f64| (a / b - 1.0).abs();
        assert!(rel(s2.a_h1, t.powi(2) * s1.a_h1) < 1e-11);
        assert!(rel(s2.a, t.powf(2.0 * q) * s1.a) < 1e-11);
        assert!(rel(s2.c, t.powf(2.0 * p) * s1.c) < 1e-11);
        // B >= -γ A for γ >= 0 power decay.
        assert!(s1.b >= -2.0 * s1.a - 1e-9 * s1.a.abs());
    }
}
