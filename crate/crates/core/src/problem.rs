//! Problem parameters and the per-grid operator context shared by the
//! functional, coupling, solver and certificate modules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{eval_k, Field, Grid, KSpec};
use crate::riesz::RieszOp;
use crate::spectral::PeriodicPlan;

/// Exponents and coefficient of the system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub k: KSpec,
}

impl ProblemParams {
    pub fn new(alpha: f64, p: f64, q: f64, k: KSpec) -> Self {
        ProblemParams { alpha, p, q, k }
    }

    /// Pure Choquard problem with the same exponents.
    pub fn without_coupling(&self) -> Self {
        ProblemParams { k: KSpec::zero(), ..*self }
    }

    fn validate(&self, d: usize) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < d as f64) {
            return Err(Error::Parameter(format!("alpha = {} outside (0, {d})", self.alpha)));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::Parameter(format!("p = {} must exceed 1", self.p)));
        }
        if !(self.q > 1.0 && self.q.is_finite()) {
            return Err(Error::Parameter(format!("q = {} must exceed 1", self.q)));
        }
        Ok(())
    }

    /// `(d+α)/d < p < (d+α)/(d-2)` and `1 < q < (d+2)/(d-2)`; every `p, q > 1`
    /// counts as inside for `d <= 2`.
    pub fn in_variational_window(&self, d: usize) -> bool {
        let n = d as f64;
        let p_lo = (n + self.alpha) / n;
        if d <= 2 {
            return self.p > p_lo && self.q > 1.0;
        }
        let p_hi = (n + self.alpha) / (n - 2.0);
        let q_hi = (n + 2.0) / (n - 2.0);
        self.p > p_lo && self.p < p_hi && self.q > 1.0 && self.q < q_hi
    }
}

/// Grid-bound operators for one parameter set.
#[derive(Debug, Clone)]
pub struct Problem {
    grid: Grid,
    params: ProblemParams,
    k: Field,
    x_grad_k: Field,
    periodic: PeriodicPlan,
    choquard: RieszOp,
    poisson: Option<RieszOp>,
}

impl Problem {
    /// Builds the operators. A nonzero `K` needs the Newtonian kernel `I_2`,
    /// hence `d = 3`.
    pub fn new(grid: Grid, params: ProblemParams) -> Result<Self> {
        params.validate(grid.d())?;
        if !params.in_variational_window(grid.d()) {
            log::warn!(
                "(p, q) = ({}, {}) outside the variational window for d = {}",
                params.p,
                params.q,
                grid.d()
            );
        }
        let coupled = !params.k.is_zero();
        if coupled && grid.d() <= 2 {
            return Err(Error::Coupling(format!(
                "alpha = 2 >= d = {} with nonzero K",
                grid.d()
            )));
        }
        let (k, x_grad_k) = eval_k(&params.k, &grid);
        let choquard = RieszOp::new(grid, params.alpha)?;
        let poisson = if !coupled {
            None
        } else if params.alpha == 2.0 {
            Some(choquard.clone())
        } else {
            Some(RieszOp::new(grid, 2.0)?)
        };
        Ok(Problem { grid, params, k, x_grad_k, periodic: PeriodicPlan::new(grid), choquard, poisson })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn k(&self) -> &Field {
        &self.k
    }

    pub fn x_grad_k(&self) -> &Field {
        &self.x_grad_k
    }

    pub fn periodic(&self) -> &PeriodicPlan {
        &self.periodic
    }

    pub fn choquard_op(&self) -> &RieszOp {
        &self.choquard
    }

    /// The `I_2` operator, present only when `K` is nonzero.
    pub fn poisson_op(&self) -> Option<&RieszOp> {
        self.poisson.as_ref()
    }

    /// True when the Choquard and Poisson kernels coincide (`α = 2`).
    pub(crate) fn shares_kernel(&self) -> bool {
        self.poisson.is_some() && self.params.alpha == 2.0
    }
}
