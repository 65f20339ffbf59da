//! Flat `key = value` run configuration with `#` comments.
//!
//! Required keys: `d`, `n`, `L`, `alpha`, `p`, `q`. Optional: `K`
//! (`zero`, `const,κ` or `powerdecay,κ,γ`; default `zero`), the solver
//! settings `tol_grad`, `max_iters`, `step_init`, `armijo_c`,
//! `armijo_shrink`, `init_sigma`, `seed`, and the outputs `out_field`
//! (default `field.gsf1`) and `out_report` (default `report.json`).
//! Relative output paths resolve against the config file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, KFamily, KSpec};
use crate::nehari::SolverConfig;
use crate::problem::ProblemParams;

pub const KNOWN_KEYS: [&str; 17] = [
    "d",
    "n",
    "L",
    "alpha",
    "p",
    "q",
    "K",
    "tol_grad",
    "max_iters",
    "step_init",
    "armijo_c",
    "armijo_shrink",
    "init_sigma",
    "seed",
    "out_field",
    "out_report",
    "threads",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    #[serde(rename = "K")]
    pub k: KSpec,
    pub solver: SolverConfig,
    pub out_field: PathBuf,
    pub out_report: PathBuf,
    /// Worker threads; `None` defers to the environment.
    pub threads: Option<usize>,
}

impl Config {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.d, self.n, self.half_width)
    }

    pub fn params(&self) -> ProblemParams {
        ProblemParams::new(self.alpha, self.p, self.q, self.k)
    }

    /// Parses the text of a config file; `base` anchors relative paths.
    pub fn parse(text: &str, base: &Path) -> Result<Config> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Config(format!("line {}: unknown key '{key}'", lineno + 1)));
            }
            if map.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
        }
        let get = |k: &str| map.get(k).map(String::as_str);
        let required = |k: &str| get(k).ok_or_else(|| Error::Config(format!("missing required key '{k}'")));
        let defaults = SolverConfig::default();
        let solver = SolverConfig {
            tol_grad: opt(get("tol_grad"), "tol_grad", defaults.tol_grad)?,
            max_iters: opt(get("max_iters"), "max_iters", defaults.max_iters)?,
            step_init: opt(get("step_init"), "step_init", defaults.step_init)?,
            armijo_c: opt(get("armijo_c"), "armijo_c", defaults.armijo_c)?,
            armijo_shrink: opt(get("armijo_shrink"), "armijo_shrink", defaults.armijo_shrink)?,
            init_sigma: opt(get("init_sigma"), "init_sigma", defaults.init_sigma)?,
            seed: opt(get("seed"), "seed", defaults.seed)?,
        };
        solver.validate()?;
        let resolve = |v: Option<&str>, default: &str| {
            let p = PathBuf::from(v.unwrap_or(default));
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        let threads = match get("threads") {
            Some(v) => Some(parse_value::<usize>(v, "threads")?),
            None => None,
        };
        let cfg = Config {
            d: parse_value(required("d")?, "d")?,
            n: parse_value(required("n")?, "n")?,
            half_width: parse_value(required("L")?, "L")?,
            alpha: parse_value(required("alpha")?, "alpha")?,
            p: parse_value(required("p")?, "p")?,
            q: parse_value(required("q")?, "q")?,
            k: match get("K") {
                Some(v) => parse_kspec(v)?,
                None => KSpec::zero(),
            },
            solver,
            out_field: resolve(get("out_field"), "field.gsf1"),
            out_report: resolve(get("out_report"), "report.json"),
            threads,
        };
        cfg.grid()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read '{}': {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Config::parse(&text, base)
    }
}

fn parse_value<T: FromStr>(v: &str, key: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("bad value '{v}' for '{key}'")))
}

fn opt<T: FromStr>(v: Option<&str>, key: &str, default: T) -> Result<T> {
    v.map_or(Ok(default), |v| parse_value(v, key))
}

/// Parses `family[,kappa[,gamma]]`, e.g. `powerdecay,0.1,2`.
pub fn parse_kspec(s: &str) -> Result<KSpec> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let family = KFamily::from_str(parts[0])?;
    let num = |i: usize, name: &str| -> Result<f64> {
        parts
            .get(i)
            .ok_or_else(|| Error::Config(format!("K '{s}' lacks {name}")))
            .and_then(|v| parse_value(v, name))
    };
    let (kappa, gamma, arity) = match family {
        KFamily::Zero => (0.0, 0.0, 1),
        KFamily::Const => (num(1, "kappa")?, 0.0, 2),
        KFamily::PowerDecay => (num(1, "kappa")?, num(2, "gamma")?, 3),
    };
    if parts.len() != arity {
        return Err(Error::Config(format!("K '{s}' expects {arity} comma-separated fields")));
    }
    KSpec::new(family, kappa, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "d = 3\nn = 16\nL = 8 # half width\nalpha = 2\np = 2\nq = 2\n";

    #[test]
    fn parses_minimal_and_defaults() {
        let c = Config::parse(BASE, Path::new("/tmp/x")).unwrap();
        assert_eq!((c.d, c.n), (3, 16));
        assert_eq!(c.k, KSpec::zero());
        assert_eq!(c.solver, SolverConfig::default());
        assert_eq!(c.out_field, PathBuf::from("/tmp/x/field.gsf1"));
    }

    #[test]
    fn rejects_unknown_missing_and_bad() {
        let p = Path::new(".");
        assert!(Config::parse(&format!("{BASE}tol = 1"), p).is_err());
        assert!(Config::parse("d = 3\nn = 16\n", p).is_err());
        assert!(Config::parse(&BASE.replace("n = 16", "n = 15"), p).is_err());
        assert!(Config::parse(&format!("{BASE}d = 3"), p).is_err());
        assert!(Config::parse(&format!("{BASE}armijo_c = 0.9"), p).is_err());
        assert!(Config::parse(&format!("{BASE}junk"), p).is_err());
    }

    #[test]
    fn k_syntax() {
        assert_eq!(parse_kspec("powerdecay,0.1,2").unwrap(), KSpec::power_decay(0.1, 2.0).unwrap());
        assert_eq!(parse_kspec("const, 1").unwrap(), KSpec::constant(1.0).unwrap());
        assert_eq!(parse_kspec("zero").unwrap(), KSpec::zero());
        assert!(parse_kspec("const").is_err());
        assert!(parse_kspec("const,1,2").is_err());
        assert!(parse_kspec("wave,1").is_err());
    }
}
