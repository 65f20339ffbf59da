//! Pohozaev identity as a residual certificate:
//!
//! ```text
//! (d-2)/2 ‖∇u‖² + d/2 ‖u‖² + (d+2)/(2q) A + (1/q) B = (d+α)/(2p) C
//! ```

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::functional::Evaluation;
use crate::grid::Field;
use crate::problem::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PohozaevReport {
    pub lhs_kinetic: f64,
    pub lhs_mass: f64,
    pub lhs_coupling: f64,
    pub lhs_kgrad: f64,
    pub lhs_total: f64,
    pub rhs: f64,
    pub rel_residual: f64,
    /// `(d+α)/(2p) (‖u‖²_{H¹} + A)`: the right side after substituting
    /// `C = ‖u‖² + A`, valid on the Nehari manifold.
    pub rhs_nehari: f64,
}

impl PohozaevReport {
    pub fn from_evaluation(problem: &Problem, eval: &Evaluation) -> Self {
        let n = problem.grid().d() as f64;
        let params = problem.params();
        let (alpha, p, q) = (params.alpha, params.p, params.q);
        let u = eval.u();
        let l2 = u.dot(u);
        let grad2 = -u.dot(eval.laplacian());
        let lhs_kinetic = 0.5 * (n - 2.0) * grad2;
        let lhs_mass = 0.5 * n * l2;
        let lhs_coupling = (n + 2.0) / (2.0 * q) * eval.a;
        let lhs_kgrad = eval.b / q;
        let lhs_total = lhs_kinetic + lhs_mass + lhs_coupling + lhs_kgrad;
        let rhs = (n + alpha) / (2.0 * p) * eval.c;
        let rel_residual = (lhs_total - rhs).abs() / lhs_total.abs().max(rhs.abs()).max(1e-300);
        PohozaevReport {
            lhs_kinetic,
            lhs_mass,
            lhs_coupling,
            lhs_kgrad,
            lhs_total,
            rhs,
            rel_residual,
            rhs_nehari: (n + alpha) / (2.0 * p) * (eval.a_h1 + eval.a),
        }
    }
}

/// Evaluates every term of the identity at `u`, recomputing `φ_u`.
pub fn pohozaev_residual(problem: &Problem, u: &Field) -> Result<PohozaevReport> {
    let eval = Evaluation::new(problem, u)?;
    Ok(PohozaevReport::from_evaluation(problem, &eval))
}
