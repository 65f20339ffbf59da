//! Energy functionals `J` and `E`, the Euler–Lagrange gradient and the
//! Nehari function `G(u) = <J'(u), u>`.

use serde::{Deserialize, Serialize};

use crate::coupling::{abs_pow, signed_pow};
use crate::error::Result;
use crate::grid::Field;
use crate::problem::Problem;

/// Energy values and the integrals they are assembled from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub a_h1: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub j: f64,
    pub e: f64,
    pub g: f64,
}

impl EnergyBreakdown {
    fn from_parts(a_h1: f64, a: f64, b: f64, c: f64, p: f64, q: f64) -> Self {
        EnergyBreakdown {
            a_h1,
            a,
            b,
            c,
            j: a_h1 / 2.0 + a / (2.0 * q) - c / (2.0 * p),
            e: a_h1 / 2.0 - c / (2.0 * p),
            g: a_h1 + a - c,
        }
    }
}

/// All nonlinear pieces of one field, kept so that a rescaled copy costs no
/// transforms.
#[derive(Debug, Clone)]
pub struct Evaluation {
    u: Field,
    laplacian: Field,
    /// `I_α * |u|^p`
    conv: Field,
    phi: Field,
    pub a_h1: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    p: f64,
    q: f64,
}

impl Evaluation {
    pub fn new(problem: &Problem, u: &Field) -> Result<Self> {
        problem.grid().check_same(u.grid())?;
        let params = problem.params();
        let (p, q) = (params.p, params.q);
        let laplacian = problem.periodic().laplacian(u);
        let up = abs_pow(u, p);
        let (conv, phi, uq) = match problem.poisson_op() {
            None => (problem.choquard_op().apply(&up)?, Field::zeros(*u.grid()), None),
            Some(poisson) => {
                let uq = abs_pow(u, q);
                let source = problem.k().zip_map(&uq, |k, v| k * v);
                let (conv, phi) = if problem.shares_kernel() {
                    problem.choquard_op().apply_pair(&up, &source)?
                } else {
                    (problem.choquard_op().apply(&up)?, poisson.apply(&source)?)
                };
                (conv, phi, Some(uq))
            }
        };
        let a_h1 = u.dot(u) - u.dot(&laplacian);
        let (a, b) = match &uq {
            Some(uq) => {
                let phi_uq = phi.zip_map(uq, |f, v| f * v);
                (phi_uq.dot(problem.k()), phi_uq.dot(problem.x_grad_k()))
            }
            None => (0.0, 0.0),
        };
        let c = conv.dot(&up);
        Ok(Evaluation { u: u.clone(), laplacian, conv, phi, a_h1, a, b, c, p, q })
    }

    pub fn u(&self) -> &Field {
        &self.u
    }

    pub fn phi(&self) -> &Field {
        &self.phi
    }

    pub fn laplacian(&self) -> &Field {
        &self.laplacian
    }

    pub fn energy(&self) -> EnergyBreakdown {
        EnergyBreakdown::from_parts(self.a_h1, self.a, self.b, self.c, self.p, self.q)
    }

    /// Evaluation of `t u`, using the homogeneity of every piece.
    pub fn scaled(&self, t: f64) -> Evaluation {
        let (tp, tq) = (t.powf(self.p), t.powf(self.q));
        Evaluation {
            u: self.u.scaled(t),
            laplacian: self.laplacian.scaled(t),
            conv: self.conv.scaled(tp),
            phi: self.phi.scaled(tq),
            a_h1: t * t * self.a_h1,
            a: tq * tq * self.a,
            b: tq * tq * self.b,
            c: tp * tp * self.c,
            p: self.p,
            q: self.q,
        }
    }

    /// `L^2` gradient
    /// `-Δu + u + K φ_u sign(u)|u|^{q-1} - (I_α*|u|^p) sign(u)|u|^{p-1}`.
    pub fn gradient(&self, problem: &Problem) -> Field {
        let attract = self.conv.zip_map(&signed_pow(&self.u, self.p - 1.0), |c, s| c * s);
        let mut g = self.u.zip_map(&self.laplacian, |u, l| u - l).axpy(-1.0, &attract);
        if problem.poisson_op().is_some() {
            let kphi = problem.k().zip_map(&self.phi, |k, f| k * f);
            let repel = kphi.zip_map(&signed_pow(&self.u, self.q - 1.0), |a, s| a * s);
            g = g.axpy(1.0, &repel);
        }
        g
    }

    /// `‖(1 - Δ) u‖_2`, the scale used for relative gradient norms.
    pub fn linear_norm(&self) -> f64 {
        self.u.zip_map(&self.laplacian, |u, l| u - l).l2_norm()
    }
}

/// `J`, `E`, `G` and their parts at `u`.
pub fn energy_j(problem: &Problem, u: &Field) -> Result<EnergyBreakdown> {
    Ok(Evaluation::new(problem, u)?.energy())
}

/// `L^2` gradient of `J` at `u`.
pub fn grad_j(problem: &Problem, u: &Field) -> Result<Field> {
    Ok(Evaluation::new(problem, u)?.gradient(problem))
}

/// `G(u) = ‖u‖² + A(u) - C(u)`.
pub fn nehari_g(problem: &Problem, u: &Field) -> Result<f64> {
    Ok(energy_j(problem, u)?.g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Grid, KSpec};
    use crate::problem::ProblemParams;

    fn bump(g: Grid) -> Field {
        Field::from_fn(g, |x| {
            1.3 * (-(x[0] - 0.2).powi(2) - 0.6 * x[1] * x[1] - 0.9 * x[2] * x[2]).exp()
        })
    }

    #[test]
    fn zero_field() {
        let g = make_grid(3, 12, 4.0).unwrap();
        let prob = Problem::new(g, ProblemParams::new(2.0, 2.5, 2.0, KSpec::power_decay(0.5, 2.0).unwrap())).unwrap();
        let e = energy_j(&prob, &Field::zeros(g)).unwrap();
        assert_eq!((e.j, e.e, e.g), (0.0, 0.0, 0.0));
        assert!(grad_j(&prob, &Field::zeros(g)).unwrap().is_zero());
    }

    #[test]
    fn no_coupling_means_j_equals_e() {
        let g = make_grid(3, 12, 4.0).unwrap();
        let prob = Problem::new(g, ProblemParams::new(2.0, 2.0, 2.0, KSpec::zero())).unwrap();
        let e = energy_j(&prob, &bump(g)).unwrap();
        assert_eq!(e.j, e.e);
        assert_eq!(e.a, 0.0);
    }

    #[test]
    fn j_recomposes_from_parts() {
        let g = make_grid(3, 12, 4.0).unwrap();
        let (p, q) = (2.5, 2.0);
        let prob = Problem::new(g, ProblemParams::new(2.0, p, q, KSpec::power_decay(0.5, 2.0).unwrap())).unwrap();
        let e = energy_j(&prob, &bump(g)).unwrap();
        assert_eq!(e.j, e.a_h1 / 2.0 + e.a / (2.0 * q) - e.c / (2.0 * p));
        assert_eq!(e.g, e.a_h1 + e.a - e.c);
        assert!(e.j >= e.e);
    }

    #[test]
    fn gradient_without_coupling_is_choquard_residual() {
        let g = make_grid(2, 16, 4.0).unwrap();
        let prob = Problem::new(g, ProblemParams::new(1.0, 2.0, 2.0, KSpec::zero())).unwrap();
        let u = Field::from_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1])).exp());
        let grad = grad_j(&prob, &u).unwrap();
        let lap = crate::spectral::laplacian(&u);
        let conv = prob.choquard_op().apply(&u.map(|v| v * v)).unwrap();
        let expect = u.zip_map(&lap, |a, b| a - b).axpy(-1.0, &conv.zip_map(&u, |c, v| c * v));
        assert!(grad.axpy(-1.0, &expect).max_abs() <= 1e-13 * expect.max_abs());
    }

    #[test]
    fn nehari_scaling_law() {
        let g = make_grid(3, 12, 4.0).unwrap();
        let (p, q) = (2.5, 2.0);
        let prob = Problem::new(g, ProblemParams::new(2.0, p, q, KSpec::power_decay(0.5, 2.0).unwrap())).unwrap();
        let u = bump(g);
        let e = energy_j(&prob, &u).unwrap();
        for &t in &[0.6_f64, 1.4, 2.2] {
            let direct = nehari_g(&prob, &u.scaled(t)).unwrap();
            let predicted = t * t * e.a_h1 + t.powf(2.0 * q) * e.a - t.powf(2.0 * p) * e.c;
            let scale = t * t * e.a_h1 + t.powf(2.0 * q) * e.a + t.powf(2.0 * p) * e.c;
            assert!((direct - predicted).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn scaled_evaluation_matches_recomputation() {
        let g = make_grid(3, 12, 4.0).unwrap();
        let prob = Problem::new(g, ProblemParams::new(2.0, 3.0, 1.5, KSpec::power_decay(0.3, 1.0).unwrap())).unwrap();
        let u = bump(g);
        let ev = Evaluation::new(&prob, &u).unwrap().scaled(1.9);
        let direct = Evaluation::new(&prob, &u.scaled(1.9)).unwrap();
        let (a, b) = (ev.energy(), direct.energy());
        for (x, y) in [(a.a_h1, b.a_h1), (a.a, b.a), (a.b, b.b), (a.c, b.c)] {
            assert!((x / y - 1.0).abs() < 1e-12);
        }
        let ga = ev.gradient(&prob);
        let gb = direct.gradient(&prob);
        assert!(ga.axpy(-1.0, &gb).max_abs() <= 1e-12 * gb.max_abs());
    }
}
