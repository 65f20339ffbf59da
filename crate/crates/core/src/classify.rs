//! Parameter-space classification: the Pohozaev-type nonexistence branches,
//! the existence window, and CSV region maps over `(p, q)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, KFamily, KSpec};
use crate::nehari::{minimize, SolverConfig};
use crate::problem::{Problem, ProblemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    NonexistenceI,
    NonexistenceIi,
    ExistenceRegime,
    Undetermined,
    HypothesesUnavailable,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::NonexistenceI => "NONEXISTENCE_I",
            Verdict::NonexistenceIi => "NONEXISTENCE_II",
            Verdict::ExistenceRegime => "EXISTENCE_REGIME",
            Verdict::Undetermined => "UNDETERMINED",
            Verdict::HypothesesUnavailable => "HYPOTHESES_UNAVAILABLE",
        }
    }

    fn is_nonexistence(&self) -> bool {
        matches!(self, Verdict::NonexistenceI | Verdict::NonexistenceIi)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One evaluated inequality `lhs REL rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub name: String,
    pub relation: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Names of the witnesses, in output order.
pub const WITNESS_NAMES: [&str; 12] = [
    "sign_i",
    "gamma_bound_i",
    "p_ge_crit",
    "nex1_ratio",
    "sign_ii",
    "p_le_low",
    "nex2_ratio",
    "q_window",
    "p_window_low",
    "p_window_high",
    "q_lt_p",
    "k_in_lr",
];

pub const EXISTENCE_CAVEAT: &str = "requires ‖K‖_r < M, M nonconstructive";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionVerdict {
    pub verdict: Verdict,
    pub n: usize,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
    pub k: KSpec,
    pub witnesses: Vec<Witness>,
    pub r_exponent: Option<f64>,
    pub notes: Vec<String>,
}

/// `r = 2N / (2N - (q+1)(N-2))`, the Lebesgue exponent making
/// `1/r + (q+1)/2* = 1`.
pub fn compute_r(n: usize, q: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::Parameter(format!("N = {n} < 3 has no critical Sobolev exponent")));
    }
    let nf = n as f64;
    let q_hi = (nf + 2.0) / (nf - 2.0);
    if !(q > 1.0 && q < q_hi) {
        return Err(Error::Parameter(format!("q = {q} outside (1, {q_hi})")));
    }
    Ok(2.0 * nf / (2.0 * nf - (q + 1.0) * (nf - 2.0)))
}

/// The certificate used when none is supplied: `0` for constant and zero
/// `K`, the decay exponent for power decay.
pub fn default_gamma(k: &KSpec) -> f64 {
    match k.family {
        KFamily::PowerDecay => k.gamma,
        _ => 0.0,
    }
}

fn witness(name: &str, relation: &str, lhs: f64, rhs: f64, holds: bool) -> Witness {
    Witness { name: name.to_string(), relation: relation.to_string(), lhs, rhs, holds }
}

/// Whether `x·∇K + γK >= 0` (sign `+1`) or `<= 0` (sign `-1`) everywhere.
///
/// For `κ(1+|x|²)^{-γ₀/2}` the expression is
/// `κ(1+|x|²)^{-γ₀/2-1} (γ + (γ-γ₀)|x|²)`.
fn sign_condition(k: &KSpec, gamma: f64, nonneg: bool) -> (f64, bool) {
    if k.is_zero() {
        return (gamma, true);
    }
    let g0 = match k.family {
        KFamily::PowerDecay => k.gamma,
        _ => 0.0,
    };
    if nonneg {
        let bound = g0.max(0.0);
        (bound, gamma >= bound)
    } else {
        let bound = g0.min(0.0);
        (bound, gamma <= bound)
    }
}

/// Classifies `(N, α, p, q)` for coefficient `k` with Pohozaev certificate
/// `gamma`.
pub fn classify(n: usize, alpha: f64, p: f64, q: f64, gamma: f64, k: &KSpec) -> RegionVerdict {
    let mut out = RegionVerdict {
        verdict: Verdict::HypothesesUnavailable,
        n,
        alpha,
        p,
        q,
        gamma,
        k: *k,
        witnesses: Vec::new(),
        r_exponent: None,
        notes: Vec::new(),
    };
    let nf = n as f64;
    if n < 3 {
        out.notes.push(format!("N = {n} < 3"));
        return out;
    }
    if !(alpha > 0.0 && alpha < nf) {
        out.notes.push(format!("alpha = {alpha} outside (0, {n})"));
        return out;
    }
    if !(p > 1.0 && q > 1.0 && p.is_finite() && q.is_finite() && gamma.is_finite()) {
        out.notes.push("p, q must exceed 1 and gamma must be finite".into());
        return out;
    }
    let coupled = !k.is_zero();
    let na = nf + alpha;
    let ratio_l = na / p;
    let ratio_r = (nf + 2.0 - 2.0 * gamma) / q;
    let ratio_le = na * q <= (nf + 2.0 - 2.0 * gamma) * p;
    let ratio_ge = na * q >= (nf + 2.0 - 2.0 * gamma) * p;
    let ratio_gt = na * q > (nf + 2.0 - 2.0 * gamma) * p;

    let (b1, sign_i) = sign_condition(k, gamma, true);
    let gamma_bound = !coupled || gamma < (nf + 2.0) / 2.0;
    let p_ge = p * (nf - 2.0) >= na;
    let nex1 = !coupled || ratio_le;
    let (b2, sign_ii) = sign_condition(k, gamma, false);
    let p_le = p * nf <= na;
    let strict_ii = coupled && k.family == KFamily::Const && gamma == 0.0;
    let nex2 = !coupled || if strict_ii { ratio_gt } else { ratio_ge };

    let q_hi = (nf + 2.0) / (nf - 2.0);
    let q_win = q * (nf - 2.0) < nf + 2.0;
    let p_lo = p * nf > na;
    let p_hi = p * (nf - 2.0) < na;
    let q_lt_p = q < p;
    let r = compute_r(n, q).ok();
    out.r_exponent = r;
    let (k_lhs, k_in_lr) = match (k.is_zero(), k.family, r) {
        (true, _, _) => (0.0, true),
        (false, KFamily::PowerDecay, Some(r)) => (k.gamma * r, k.gamma * r > nf),
        (false, KFamily::PowerDecay, None) => (f64::NAN, false),
        _ => (0.0, false),
    };

    out.witnesses = vec![
        witness("sign_i", ">=", gamma, b1, sign_i),
        witness("gamma_bound_i", "<", gamma, (nf + 2.0) / 2.0, gamma_bound),
        witness("p_ge_crit", ">=", p, na / (nf - 2.0), p_ge),
        witness("nex1_ratio", "<=", ratio_l, ratio_r, nex1),
        witness("sign_ii", "<=", gamma, b2, sign_ii),
        witness("p_le_low", "<=", p, na / nf, p_le),
        witness("nex2_ratio", if strict_ii { ">" } else { ">=" }, ratio_l, ratio_r, nex2),
        witness("q_window", "<", q, q_hi, q_win),
        witness("p_window_low", ">", p, na / nf, p_lo),
        witness("p_window_high", "<", p, na / (nf - 2.0), p_hi),
        witness("q_lt_p", "<", q, p, q_lt_p),
        witness("k_in_lr", ">", k_lhs, nf, k_in_lr),
    ];
    if !coupled {
        out.notes.push("K vanishes: the coupling ratio conditions are vacuous".into());
    }
    out.verdict = if sign_i && gamma_bound && p_ge && nex1 {
        Verdict::NonexistenceI
    } else if sign_ii && p_le && nex2 {
        Verdict::NonexistenceIi
    } else if q_win && p_lo && p_hi && q_lt_p && k_in_lr {
        out.notes.push(EXISTENCE_CAVEAT.to_string());
        Verdict::ExistenceRegime
    } else {
        Verdict::Undetermined
    };
    out
}

/// Tries every certificate in `gammas` and returns the first nonexistence
/// verdict, falling back to the verdict at the default certificate.
pub fn scan_gamma(n: usize, alpha: f64, p: f64, q: f64, k: &KSpec, gammas: &[f64]) -> RegionVerdict {
    for &g in gammas {
        let v = classify(n, alpha, p, q, g, k);
        if v.verdict.is_nonexistence() {
            return v;
        }
    }
    classify(n, alpha, p, q, default_gamma(k), k)
}

/// `count` equally spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Parameter("range must be finite with at least one point".into()));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count).map(|i| if i + 1 == count { hi } else { lo + step * i as f64 }).collect())
}

/// Coarse solve attached to existence-regime cells.
#[derive(Debug, Clone, Copy)]
pub struct SweepSolve {
    pub grid: Grid,
    pub cfg: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    pub converged: bool,
    pub m_j: f64,
    pub pohozaev_rel_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub verdict: RegionVerdict,
    pub solve: Option<SolveSummary>,
}

/// Classifies every `(p, q)` pair; optionally solves each existence cell.
pub fn sweep(
    n: usize,
    alpha: f64,
    ps: &[f64],
    qs: &[f64],
    gamma: f64,
    k: &KSpec,
    solve: Option<&SweepSolve>,
) -> Result<Vec<SweepCell>> {
    let mut cells = Vec::with_capacity(ps.len() * qs.len());
    for &p in ps {
        for &q in qs {
            let verdict = classify(n, alpha, p, q, gamma, k);
            let summary = match solve {
                Some(s) if verdict.verdict == Verdict::ExistenceRegime => {
                    let problem = Problem::new(s.grid, ProblemParams::new(alpha, p, q, *k))?;
                    let (_, rep) = minimize(&problem, &s.cfg)?;
                    Some(SolveSummary {
                        converged: rep.converged,
                        m_j: rep.energy_j,
                        pohozaev_rel_residual: rep.pohozaev_rel_residual,
                    })
                }
                _ => None,
            };
            cells.push(SweepCell { verdict, solve: summary });
        }
    }
    Ok(cells)
}

fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

/// Writes sweep cells as CSV.
pub fn write_sweep_csv<W: Write>(cells: &[SweepCell], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> =
        ["N", "alpha", "p", "q", "gamma", "family", "kappa", "verdict", "r"].iter().map(|s| s.to_string()).collect();
    for name in WITNESS_NAMES {
        header.push(name.to_string());
        for suffix in ["lhs", "rhs", "holds"] {
            header.push(format!("{name}_{suffix}"));
        }
    }
    header.extend(["converged", "m_J", "pohozaev_rel_residual"].iter().map(|s| s.to_string()));
    w.write_record(&header).map_err(csv_err)?;
    for cell in cells {
        let v = &cell.verdict;
        let mut row = vec![
            v.n.to_string(),
            fmt_num(v.alpha),
            fmt_num(v.p),
            fmt_num(v.q),
            fmt_num(v.gamma),
            v.k.family.name().to_string(),
            fmt_num(v.k.kappa),
            v.verdict.name().to_string(),
            v.r_exponent.map(fmt_num).unwrap_or_default(),
        ];
        for name in WITNESS_NAMES {
            match v.witnesses.iter().find(|wt| wt.name == name) {
                Some(wt) => row.extend([wt.name.clone(), fmt_num(wt.lhs), fmt_num(wt.rhs), wt.holds.to_string()]),
                None => row.extend([name.to_string(), String::new(), String::new(), String::new()]),
            }
        }
        match &cell.solve {
            Some(s) => row.extend([s.converged.to_string(), fmt_num(s.m_j), fmt_num(s.pohozaev_rel_residual)]),
            None => row.extend([String::new(), String::new(), String::new()]),
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}
