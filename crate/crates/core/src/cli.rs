//! Command-line front end behind the `l1h` binary.
//!
//! `gen` writes a problem directory, `solve` runs one solver on such a
//! directory, and `bench` runs an ensemble and writes CSV tables.
//! Exit codes: 0 success, 1 usage error, 2 input error, 3 solver failure.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bench::{run_experiment, ser_db, summarize, write_outputs, ExperimentConfig, SolverKind};
use crate::error::Error;
use crate::homotopy::adaptive::{solve_arw, WeightPolicy};
use crate::homotopy::lasso::solve_lasso;
use crate::homotopy::reweight::{solve_irw, update_weights_irw_with};
use crate::homotopy::{SolveReport, SolverOptions, WeightedProblem};
use crate::linalg::{mmio, DenseMatrix, FactorMode};
use crate::prox::{prox_solve, prox_solve_adaptive, prox_solve_warm, ProxOptions};
use crate::signal::{default_tau, Instance, SignalKind};

#[derive(Debug, Parser)]
#[command(name = "l1h", version, about = "Homotopy solvers for weighted l1 recovery")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic recovery problem.
    Gen(GenArgs),
    /// Solve a problem directory written by `gen`.
    Solve(SolveArgs),
    /// Run a seeded ensemble and write trials.csv and summary.csv.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value = "blocks")]
    pub kind: SignalKind,
    /// Signal length, a power of two.
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, default_value_t = 128)]
    pub m: usize,
    /// Measurement SNR in dB; `inf` for noiseless.
    #[arg(long, default_value_t = 40.0)]
    pub snr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Directory holding A.mtx, y.mtx and optionally xbar.mtx and meta.toml.
    pub problem: PathBuf,
    #[arg(long, default_value = "arw")]
    pub solver: SolverKind,
    /// Regularization level, or `auto` for σ√(ln N) from meta.toml.
    #[arg(long, default_value = "auto")]
    pub tau: Tau,
    #[arg(long, default_value_t = 5)]
    pub reweight_iters: usize,
    #[arg(long, default_value = "reciprocal")]
    pub arw_policy: WeightPolicy,
    #[arg(long, default_value = "cholesky", value_parser = parse_factor_mode)]
    pub factor_mode: FactorMode,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long, default_value_t = 1e-8)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = 200_000)]
    pub max_inner: usize,
    /// Write the final iterate here as Matrix Market.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// TOML experiment description; defaults apply to absent keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(short, long, default_value = "bench-out")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tau {
    Auto,
    Value(f64),
}

impl std::str::FromStr for Tau {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(Tau::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(Tau::Value(v)),
            _ => Err(format!("expected `auto` or a positive number, got `{s}`")),
        }
    }
}

fn parse_factor_mode(s: &str) -> Result<FactorMode, String> {
    match s {
        "cholesky" => Ok(FactorMode::Cholesky),
        "inverse" => Ok(FactorMode::Inverse),
        _ => Err(format!("expected cholesky or inverse, got `{s}`")),
    }
}

/// Description of a generated problem, stored next to its arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub kind: SignalKind,
    pub n: usize,
    pub m: usize,
    pub snr_db: f64,
    pub seed: u64,
    pub sigma: f64,
    pub tau: f64,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(Error),
    Solver(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Input(e) => write!(f, "input error: {e}"),
            CliError::Solver(e) => write!(f, "solver failure: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

type CliResult<T> = Result<T, CliError>;

fn input(e: Error) -> CliError {
    CliError::Input(e)
}

fn out_err(e: std::io::Error) -> CliError {
    CliError::Input(Error::io("<stdout>", e))
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit code. Normal output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = write!(err, "{}", e.render());
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a, out),
        Command::Solve(a) => cmd_solve(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "l1h: {e}");
            e.exit_code()
        }
    }
}

pub fn cmd_gen(args: &GenArgs, out: &mut dyn Write) -> CliResult<()> {
    if args.n < 16 || !args.n.is_power_of_two() {
        return Err(CliError::Usage(format!(
            "--n must be a power of two of at least 16, got {}",
            args.n
        )));
    }
    if args.m == 0 || args.m > args.n {
        return Err(CliError::Usage(format!("--m must lie in 1..={}, got {}", args.n, args.m)));
    }
    if args.snr.is_nan() {
        return Err(CliError::Usage("--snr must be a number".into()));
    }
    let inst = Instance::generate(args.kind, args.n, args.m, args.snr, args.seed).map_err(input)?;
    let dir = &args.output;
    std::fs::create_dir_all(dir).map_err(|e| input(Error::io(dir, e)))?;
    mmio::write_matrix(dir.join("A.mtx"), &inst.a).map_err(input)?;
    mmio::write_vector(dir.join("y.mtx"), &inst.y).map_err(input)?;
    mmio::write_vector(dir.join("xbar.mtx"), &inst.xbar).map_err(input)?;
    let meta = Meta {
        kind: inst.kind,
        n: inst.n,
        m: inst.m,
        snr_db: inst.snr_db,
        seed: inst.seed,
        sigma: inst.sigma,
        tau: inst.tau,
    };
    let path = dir.join("meta.toml");
    let text = toml::to_string(&meta).expect("metadata is always representable");
    std::fs::write(&path, text).map_err(|e| input(Error::io(&path, e)))?;
    writeln!(
        out,
        "wrote {} ({}x{}, sigma {:e}, tau {:e})",
        dir.display(),
        inst.m,
        inst.n,
        inst.sigma,
        inst.tau
    )
    .map_err(out_err)
}

pub fn read_meta(dir: &Path) -> Result<Option<Meta>, Error> {
    let path = dir.join("meta.toml");
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    toml::from_str(&text)
        .map(Some)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

struct Loaded {
    a: DenseMatrix,
    y: Vec<f64>,
    xbar: Option<Vec<f64>>,
    meta: Option<Meta>,
}

fn load(dir: &Path) -> Result<Loaded, Error> {
    let a = mmio::read_matrix(dir.join("A.mtx"))?;
    let y = mmio::read_vector(dir.join("y.mtx"))?;
    if y.len() != a.rows() {
        return Err(Error::InvalidInput(format!(
            "y has {} entries but A has {} rows",
            y.len(),
            a.rows()
        )));
    }
    let xbar_path = dir.join("xbar.mtx");
    let xbar = if xbar_path.exists() {
        let x = mmio::read_vector(&xbar_path)?;
        if x.len() != a.cols() {
            return Err(Error::InvalidInput(format!(
                "xbar has {} entries but A has {} columns",
                x.len(),
                a.cols()
            )));
        }
        Some(x)
    } else {
        None
    };
    Ok(Loaded {
        a,
        y,
        xbar,
        meta: read_meta(dir)?,
    })
}

fn resolve_tau(tau: Tau, data: &Loaded) -> Result<f64, Error> {
    match (tau, &data.meta) {
        (Tau::Value(v), _) => Ok(v),
        (Tau::Auto, Some(meta)) if meta.sigma > 0.0 => Ok(default_tau(meta.sigma, data.a.cols())),
        (Tau::Auto, Some(meta)) => Ok(meta.tau),
        (Tau::Auto, None) => Err(Error::InvalidInput(
            "--tau auto needs meta.toml; pass a number instead".into(),
        )),
    }
}

struct Line<'a> {
    solver: SolverKind,
    iter: usize,
    problem: &'a WeightedProblem,
    weights: &'a [f64],
    x: &'a [f64],
    report: &'a SolveReport,
    xbar: Option<&'a [f64]>,
}

impl Line<'_> {
    fn print(&self, out: &mut dyn Write) -> CliResult<()> {
        let objective = crate::homotopy::objective(self.problem.a(), self.problem.y(), self.weights, self.x);
        let scaled = self.report.kkt_residual / self.problem.correlation_scale().max(f64::MIN_POSITIVE);
        write!(
            out,
            "solver={} iter={} objective={:.12e} matvec={} steps={} support={} kkt={:.3e}",
            self.solver,
            self.iter,
            objective,
            self.report.ata,
            self.report.steps,
            self.report.support_size,
            scaled
        )
        .map_err(out_err)?;
        if let Some(xbar) = self.xbar {
            if let Ok(ser) = ser_db(xbar, self.x) {
                write!(out, " ser_db={ser:.3}").map_err(out_err)?;
            }
        }
        writeln!(out).map_err(out_err)
    }
}

pub fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> CliResult<()> {
    let data = load(&args.problem).map_err(input)?;
    let tau = resolve_tau(args.tau, &data).map_err(input)?;
    let problem = WeightedProblem::uniform(data.a.clone(), data.y.clone(), tau).map_err(input)?;
    let opts = SolverOptions {
        max_steps: args.max_steps,
        factor_mode: args.factor_mode,
        ..Default::default()
    };
    let prox = ProxOptions {
        grad_tol: args.grad_tol,
        max_inner: args.max_inner,
        ..Default::default()
    };
    let solver = CliError::Solver;
    let xbar = data.xbar.as_deref();
    let line = |iter, weights: &[f64], x: &[f64], report: &SolveReport, out: &mut dyn Write| {
        Line {
            solver: args.solver,
            iter,
            problem: &problem,
            weights,
            x,
            report,
            xbar,
        }
        .print(out)
    };
    let x = match args.solver {
        SolverKind::Lasso => {
            let (x, rep) = solve_lasso(&problem, &opts).map_err(solver)?;
            line(0, problem.weights(), &x, &rep, out)?;
            x
        }
        SolverKind::Irw => {
            let (x, rounds) = solve_irw(&problem, args.reweight_iters, &opts).map_err(solver)?;
            for (k, r) in rounds.iter().enumerate() {
                line(k, &r.weights, &r.x, &r.report, out)?;
            }
            x
        }
        SolverKind::Arw => {
            let (x, w, rep) = solve_arw(&problem, args.arw_policy, &opts).map_err(solver)?;
            line(0, &w, &x, &rep, out)?;
            x
        }
        SolverKind::Prox => {
            let (mut x, rep) = prox_solve(&problem, &prox).map_err(solver)?;
            line(0, problem.weights(), &x, &rep, out)?;
            for k in 1..=args.reweight_iters {
                let w = match update_weights_irw_with(&x, tau, data.a.rows(), opts.reweight_epsilon) {
                    Ok(w) => w,
                    Err(Error::DegenerateWeights) => vec![tau; data.a.cols()],
                    Err(e) => return Err(solver(e)),
                };
                let next = problem.with_weights(w).map_err(input)?;
                let (xk, rep) = prox_solve_warm(&next, &x, &prox).map_err(solver)?;
                x = xk;
                line(k, next.weights(), &x, &rep, out)?;
            }
            x
        }
        SolverKind::ProxAdaptive => {
            let (x, w, rep) = prox_solve_adaptive(&data.a, &data.y, tau, &prox).map_err(solver)?;
            line(0, &w, &x, &rep, out)?;
            x
        }
    };
    if let Some(path) = &args.output {
        mmio::write_vector(path, &x).map_err(input)?;
    }
    Ok(())
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_path(path).map_err(input)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if args.jobs.is_some() {
        cfg.jobs = args.jobs;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let results = run_experiment(&cfg).map_err(input)?;
    write_outputs(&args.output, &results).map_err(input)?;

    let failed = results.iter().filter(|r| r.failed()).count();
    for row in summarize(&results) {
        let last = cfg.iterations_of(row.solver);
        if row.iter + 1 == last && (row.metric == "ser_db" || row.metric == "matvec_cumulative") {
            writeln!(
                out,
                "{:<14} n={:<5} m={:<5} {:<18} {:>10.3} ± {:.3}",
                row.solver.name(),
                row.n,
                row.m,
                row.metric,
                row.mean,
                row.stddev
            )
            .map_err(out_err)?;
        }
    }
    writeln!(
        out,
        "{} results, {} failed; tables in {}",
        results.len(),
        failed,
        args.output.display()
    )
    .map_err(out_err)?;
    if failed == results.len() {
        return Err(CliError::Solver(Error::InvalidInput("every trial failed".into())));
    }
    Ok(())
}
