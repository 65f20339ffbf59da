//! `csp` command-line interface.
//!
//! Exit codes: 0 success (or a converged solve), 2 a solve that did not
//! converge, 1 usage, input or numerical errors. `CSP_THREADS` or
//! `--threads` sets the worker count.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::classify::{classify, default_gamma, linspace, scan_gamma, sweep, write_sweep_csv, SweepSolve};
use crate::config::{parse_kspec, Config};
use crate::error::{Error, Result};
use crate::functional::energy_j;
use crate::grid::{radial_profile, Field, Grid, KSpec};
use crate::io::{load_field, save_field, write_atomic};
use crate::nehari::{minimize, project};
use crate::pohozaev::pohozaev_residual;
use crate::problem::Problem;
use crate::report::{RunReport, Timings};
use crate::spectral::{ConvolutionPlan, KernelSpec};

pub const THREADS_ENV: &str = "CSP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "csp", version, about = "Ground states and regime maps for the Choquard / Schrödinger-Poisson system")]
pub struct Cli {
    /// Worker threads (overrides CSP_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize J over the Nehari manifold; write the field and a JSON report.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the regime verdict for one parameter tuple as JSON.
    Classify(ClassifyArgs),
    /// Print the Pohozaev report of a stored field.
    Pohozaev {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// Tabulate verdicts over a (p, q) grid as CSV.
    Sweep(SweepArgs),
    /// Project a stored field onto the Nehari manifold.
    Project {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Where to write the projected field.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Radial profile of a stored field as CSV.
    Profile {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Free-space convolution wall times versus grid size, as CSV.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "32,48,64")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 12.0)]
        half_width: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    /// Pohozaev certificate; defaults to 0 (const, zero) or the decay exponent.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// `zero`, `const,κ` or `powerdecay,κ,γ`.
    #[arg(long = "K", default_value = "zero")]
    pub k: String,
    /// Scan certificates `lo,hi,count` and report the first nonexistence branch.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub scan_gamma: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long)]
    pub alpha: f64,
    /// `lo,hi,count`
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// `lo,hi,count`
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long = "K", default_value = "zero")]
    pub k: String,
    /// Config whose grid and solver settings drive a coarse solve in each
    /// existence cell.
    #[arg(long)]
    pub solve_config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads(cli.threads);
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn configure_threads(flag: Option<usize>) {
    let env = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok());
    if let Some(n) = flag.or(env).filter(|&n| n > 0) {
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::debug!("thread pool already initialized");
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn triple(v: &[f64], name: &str) -> Result<Vec<f64>> {
    match v {
        [lo, hi, count] if *count >= 1.0 && count.fract() == 0.0 => linspace(*lo, *hi, *count as usize),
        [x] => Ok(vec![*x]),
        _ => Err(Error::Config(format!("--{name} expects lo,hi,count or a single value"))),
    }
}

fn load_for(config: &Path, field: &Path) -> Result<(Config, Problem, Field)> {
    let cfg = Config::load(config)?;
    let problem = Problem::new(cfg.grid()?, cfg.params())?;
    let u = load_field(field)?;
    problem.grid().check_same(u.grid())?;
    Ok((cfg, problem, u))
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Solve { config } => cmd_solve(&config),
        Command::Classify(a) => {
            let k = parse_kspec(&a.k)?;
            let gamma = a.gamma.unwrap_or_else(|| default_gamma(&k));
            let verdict = match a.scan_gamma {
                Some(range) => scan_gamma(a.n, a.alpha, a.p, a.q, &k, &triple(&range, "scan-gamma")?),
                None => classify(a.n, a.alpha, a.p, a.q, gamma, &k),
            };
            print!("{}", to_json(&verdict));
            Ok(0)
        }
        Command::Pohozaev { field, config } => {
            let (_, problem, u) = load_for(&config, &field)?;
            print!("{}", to_json(&pohozaev_residual(&problem, &u)?));
            Ok(0)
        }
        Command::Sweep(a) => cmd_sweep(a),
        Command::Project { field, config, out } => {
            let (_, problem, u) = load_for(&config, &field)?;
            let proj = project(&problem, &u)?;
            let e = energy_j(&problem, &proj.field)?;
            if let Some(out) = out {
                save_field(&out, &proj.field)?;
            }
            let summary = serde_json::json!({
                "t": proj.t,
                "nehari_g": e.g,
                "a_h1": e.a_h1,
                "rel_nehari_g": e.g.abs() / e.a_h1,
                "energy_j": e.j,
            });
            print!("{}", to_json(&summary));
            Ok(0)
        }
        Command::Profile { field, out } => {
            let u = load_field(&field)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in radial_profile(&u) {
                w.serialize(row).map_err(|e| Error::Format(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
            emit(&String::from_utf8_lossy(&bytes), out.as_deref())?;
            Ok(0)
        }
        Command::Bench { sizes, alpha, half_width, out } => {
            let rows = bench(&sizes, alpha, half_width)?;
            let mut text = String::from("n,points,seconds\n");
            for (n, pts, secs) in &rows {
                text.push_str(&format!("{n},{pts},{secs}\n"));
            }
            if rows.windows(2).any(|w| w[1].2 <= w[0].2) {
                log::warn!("convolution time is not monotone in n");
            }
            emit(&text, out.as_deref())?;
            Ok(0)
        }
    }
}

fn cmd_solve(config: &Path) -> Result<i32> {
    let start = Instant::now();
    let cfg = Config::load(config)?;
    if cfg.threads.is_some() {
        configure_threads(cfg.threads);
    }
    let problem = Problem::new(cfg.grid()?, cfg.params())?;
    let setup_s = start.elapsed().as_secs_f64();
    let t0 = Instant::now();
    let (u, report) = minimize(&problem, &cfg.solver)?;
    let solve_s = t0.elapsed().as_secs_f64();
    save_field(&cfg.out_field, &u)?;
    let timings = Timings { setup_s, solve_s, total_s: start.elapsed().as_secs_f64() };
    write_atomic(&cfg.out_report, RunReport::new(&cfg, &report, timings).to_json().as_bytes())?;
    eprintln!(
        "converged={} iterations={} J={:.12e} grad_norm_rel={:.3e} pohozaev={:.3e}",
        report.converged, report.iterations, report.energy_j, report.grad_norm_rel, report.pohozaev_rel_residual
    );
    Ok(if report.converged { 0 } else { 2 })
}

fn cmd_sweep(a: SweepArgs) -> Result<i32> {
    let k: KSpec = parse_kspec(&a.k)?;
    let gamma = a.gamma.unwrap_or_else(|| default_gamma(&k));
    let ps = triple(&a.p, "p")?;
    let qs = triple(&a.q, "q")?;
    let solve = match &a.solve_config {
        Some(path) => {
            let c = Config::load(path)?;
            if c.d != a.n {
                return Err(Error::Config(format!("solve config has d = {}, sweep N = {}", c.d, a.n)));
            }
            Some(SweepSolve { grid: c.grid()?, cfg: c.solver })
        }
        None => None,
    };
    let cells = sweep(a.n, a.alpha, &ps, &qs, gamma, &k, solve.as_ref())?;
    let mut buf = Vec::new();
    write_sweep_csv(&cells, &mut buf)?;
    emit(&String::from_utf8_lossy(&buf), a.out.as_deref())?;
    Ok(0)
}

/// Times one free-space Riesz convolution of a Gaussian for each size
/// (`d = 3`); returns `(n, n^3, seconds)`.
pub fn bench(sizes: &[usize], alpha: f64, half_width: f64) -> Result<Vec<(usize, usize, f64)>> {
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("bench sizes must be strictly increasing".into()));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let grid = Grid::new(3, n, half_width)?;
        let f = Field::from_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp());
        let plan = ConvolutionPlan::new(grid, KernelSpec::Riesz { alpha })?;
        let t0 = Instant::now();
        let out = plan.apply(&f)?;
        let secs = t0.elapsed().as_secs_f64();
        debug_assert!(out.max_abs().is_finite());
        rows.push((n, grid.len(), secs));
    }
    Ok(rows)
}
