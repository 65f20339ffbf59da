//! Riesz potential `I_α * f` with kernel `A_α |x|^{α-d}`.

use std::sync::Arc;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grid::{integrate, Field, Grid};
use crate::spectral::{ConvolutionPlan, KernelSpec};

/// `A_α = Γ((d-α)/2) / (Γ(α/2) π^{d/2} 2^α)`.
pub fn riesz_constant(d: usize, alpha: f64) -> Result<f64> {
    let df = d as f64;
    if !(alpha > 0.0 && alpha < df) {
        return Err(Error::Parameter(format!("alpha = {alpha} outside (0, {d})")));
    }
    Ok(gamma(0.5 * (df - alpha))
        / (gamma(0.5 * alpha) * std::f64::consts::PI.powf(0.5 * df) * 2f64.powf(alpha)))
}

/// Riesz potential operator of order `alpha` bound to one grid.
#[derive(Debug, Clone)]
pub struct RieszOp {
    alpha: f64,
    a_alpha: f64,
    plan: Arc<ConvolutionPlan>,
}

impl RieszOp {
    pub fn new(grid: Grid, alpha: f64) -> Result<Self> {
        let a_alpha = riesz_constant(grid.d(), alpha)?;
        let plan = ConvolutionPlan::new(grid, KernelSpec::Riesz { alpha })?;
        Ok(RieszOp { alpha, a_alpha, plan: Arc::new(plan) })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn a_alpha(&self) -> f64 {
        self.a_alpha
    }

    pub fn grid(&self) -> &Grid {
        self.plan.grid()
    }

    /// `I_α * f` on the box.
    pub fn apply(&self, f: &Field) -> Result<Field> {
        self.plan.apply(f)
    }

    /// `(I_α * f, I_α * g)` sharing one transform pair.
    pub fn apply_pair(&self, f: &Field, g: &Field) -> Result<(Field, Field)> {
        self.plan.apply_pair(f, g)
    }

    /// `∫(I_α*|f|^p)|f|^p / ‖|f|^p‖²_s` with `s = 2d/(d+α)`.
    pub fn hls_ratio(&self, f: &Field, p: f64) -> Result<f64> {
        if f.is_zero() {
            return Err(Error::InvalidField("hls_ratio of the zero field".into()));
        }
        let g = f.map(|v| v.abs().powf(p));
        let num = self.apply(&g)?.dot(&g);
        let d = self.grid().d() as f64;
        let s = 2.0 * d / (d + self.alpha);
        let norm_s = integrate(&g.map(|v| v.powf(s))).powf(1.0 / s);
        Ok(num / (norm_s * norm_s))
    }
}

/// `I_α * f` through `op`.
pub fn riesz_apply(op: &RieszOp, f: &Field) -> Result<Field> {
    op.apply(f)
}

/// Builds the operator on `f`'s grid and evaluates the HLS quotient.
pub fn hls_ratio(f: &Field, alpha: f64, p: f64) -> Result<f64> {
    RieszOp::new(*f.grid(), alpha)?.hls_ratio(f, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn constants_in_three_dimensions() {
        assert!((riesz_constant(3, 2.0).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((riesz_constant(3, 1.0).unwrap() - 1.0 / (2.0 * PI * PI)).abs() < 1e-15);
        assert!(riesz_constant(3, 3.0).is_err());
        assert!(riesz_constant(3, 0.0).is_err());
        assert!(riesz_constant(1, 1.0).is_err());
    }

    #[test]
    fn zero_in_zero_out() {
        let g = make_grid(3, 8, 2.0).unwrap();
        let op = RieszOp::new(g, 1.0).unwrap();
        assert!(riesz_apply(&op, &Field::zeros(g)).unwrap().is_zero());
        assert!(op.hls_ratio(&Field::zeros(g), 2.0).is_err());
    }

    #[test]
    fn hls_ratio_amplitude_invariant_and_positive() {
        let g = make_grid(3, 16, 4.0).unwrap();
        let f = Field::from_fn(g, |x| (-(x[0] * x[0] + 2.0 * x[1] * x[1] + x[2] * x[2])).exp());
        let op = RieszOp::new(g, 2.0).unwrap();
        let a = op.hls_ratio(&f, 2.0).unwrap();
        let b = op.hls_ratio(&f.scaled(3.7), 2.0).unwrap();
        assert!(a > 0.0);
        assert!((a / b - 1.0).abs() < 1e-12);
    }
}
