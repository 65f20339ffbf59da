//! JSON run report written by `csp solve`.

use serde::Serialize;

use crate::config::Config;
use crate::nehari::SolveReport;

/// Top-level keys of a run report, in order.
pub const REPORT_KEYS: [&str; 4] = ["config", "solve", "timings", "version"];

/// Keys of the `solve` object.
pub const SOLVE_KEYS: [&str; 16] = [
    "converged",
    "iterations",
    "energy_j",
    "energy_e_of_u",
    "a_h1",
    "a",
    "b",
    "c",
    "nehari_g",
    "t_last",
    "grad_norm_rel",
    "pohozaev_rel_residual",
    "pohozaev",
    "me_reference",
    "boundary_decay",
    "trace",
];

/// Keys of the `solve.pohozaev` object.
pub const POHOZAEV_KEYS: [&str; 8] =
    ["lhs_kinetic", "lhs_mass", "lhs_coupling", "lhs_kgrad", "lhs_total", "rhs", "rel_residual", "rhs_nehari"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timings {
    pub setup_s: f64,
    pub solve_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport<'a> {
    pub config: &'a Config,
    pub solve: &'a SolveReport,
    pub timings: Timings,
    pub version: &'static str,
}

impl<'a> RunReport<'a> {
    pub fn new(config: &'a Config, solve: &'a SolveReport, timings: Timings) -> Self {
        RunReport { config, solve, timings, version: env!("CARGO_PKG_VERSION") }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
