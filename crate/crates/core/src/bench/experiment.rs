//! Seeded Monte Carlo comparison of the solvers.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{ser_db, Stats};
use crate::error::{Error, Result};
use crate::homotopy::adaptive::{solve_arw, WeightPolicy};
use crate::homotopy::lasso::solve_lasso;
use crate::homotopy::reweight::{solve_irw, update_weights_irw_with};
use crate::homotopy::{correlation_scale, SolveReport, SolverOptions, WeightedProblem};
use crate::prox::{prox_solve, prox_solve_adaptive, prox_solve_warm, ProxOptions};
use crate::signal::{derive_seed, Instance, SignalKind};

/// Scaled optimality residual above which a recorded row counts as failed.
pub const KKT_FLAG: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SolverKind {
    Lasso,
    Irw,
    Arw,
    Prox,
    ProxAdaptive,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] = [
        SolverKind::Lasso,
        SolverKind::Irw,
        SolverKind::Arw,
        SolverKind::Prox,
        SolverKind::ProxAdaptive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Lasso => "lasso",
            SolverKind::Irw => "irw",
            SolverKind::Arw => "arw",
            SolverKind::Prox => "prox",
            SolverKind::ProxAdaptive => "prox-adaptive",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                format!("unknown solver `{s}` (expected lasso, irw, arw, prox or prox-adaptive)")
            })
    }
}

impl TryFrom<String> for SolverKind {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<SolverKind> for String {
    fn from(k: SolverKind) -> String {
        k.name().to_string()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: SignalKind,
    pub n: Vec<usize>,
    /// `M = N / d` for each divisor `d`, rounded to the nearest even integer.
    pub m_divisors: Vec<f64>,
    pub trials: usize,
    pub snr_db: f64,
    pub reweight_iters: usize,
    pub solvers: Vec<SolverKind>,
    pub seed: u64,
    pub arw_policy: WeightPolicy,
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
    pub homotopy: SolverOptions,
    pub prox: ProxOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: SignalKind::Blocks,
            n: vec![256],
            m_divisors: vec![2.0, 2.5, 3.0, 3.5, 4.0],
            trials: 100,
            snr_db: 40.0,
            reweight_iters: 5,
            solvers: SolverKind::ALL.to_vec(),
            seed: 0,
            arw_policy: WeightPolicy::default(),
            jobs: None,
            homotopy: SolverOptions::default(),
            prox: ProxOptions::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::InvalidInput(msg) => Error::InvalidInput(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.n.is_empty() || self.m_divisors.is_empty() || self.solvers.is_empty() {
            return bad("n, m_divisors and solvers must be nonempty".into());
        }
        if let Some(d) = self.m_divisors.iter().find(|d| !(**d >= 1.0 && d.is_finite())) {
            return bad(format!("measurement divisor {d} must be at least 1"));
        }
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1".into());
        }
        if self.snr_db.is_nan() {
            return bad("snr_db must be a number".into());
        }
        for (n, m) in self.cells() {
            if n < 16 || !n.is_power_of_two() {
                return bad(format!("signal length must be a power of two of at least 16, got {n}"));
            }
            if m == 0 || m > n {
                return bad(format!("N = {n} gives an unusable measurement count {m}"));
            }
        }
        Ok(())
    }

    /// Every `(N, M)` pair, in configuration order.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        self.n
            .iter()
            .flat_map(|&n| self.m_divisors.iter().map(move |&d| (n, measurement_count(n, d))))
            .collect()
    }

    /// Recorded iterations per successful trial of `solver`.
    pub fn iterations_of(&self, solver: SolverKind) -> usize {
        match solver {
            SolverKind::Irw | SolverKind::Prox => self.reweight_iters + 1,
            _ => 1,
        }
    }

    /// Seed of one trial; independent of thread scheduling.
    pub fn trial_seed(&self, n: usize, m: usize, trial: usize) -> u64 {
        derive_seed(self.seed, "trial", &[n as u64, m as u64, trial as u64])
    }
}

/// `N / d` rounded to the nearest even integer.
pub fn measurement_count(n: usize, divisor: f64) -> usize {
    ((n as f64 / divisor / 2.0).round() * 2.0) as usize
}

/// One recorded solution: an IRW or prox reweighting round, or the single
/// output of a one-shot solver.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub ser_db: f64,
    /// `AᵀA` applications spent by this iteration alone.
    pub matvec: f64,
    pub wall_ms: f64,
    /// Residual relative to `‖Aᵀy‖∞`.
    pub kkt_residual: f64,
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial_id: usize,
    pub solver: SolverKind,
    pub n: usize,
    pub m: usize,
    pub snr_db: f64,
    pub iterations: Vec<IterationRecord>,
    pub error: Option<String>,
}

impl TrialResult {
    pub fn failed(&self) -> bool {
        self.error.is_some() || self.iterations.iter().any(|r| r.failed)
    }

    pub fn total_matvec(&self) -> f64 {
        self.iterations.iter().map(|r| r.matvec).sum()
    }

    pub fn final_ser(&self) -> f64 {
        self.iterations.last().map_or(f64::NAN, |r| r.ser_db)
    }
}

fn record(inst: &Instance, scale: f64, x: &[f64], rep: &SolveReport) -> Result<IterationRecord> {
    let kkt = rep.kkt_residual / scale;
    Ok(IterationRecord {
        ser_db: ser_db(&inst.xbar, x)?,
        matvec: rep.ata,
        wall_ms: rep.wall.as_secs_f64() * 1e3,
        kkt_residual: kkt,
        failed: !(kkt <= KKT_FLAG),
    })
}

fn prox_rounds(
    inst: &Instance,
    problem: &WeightedProblem,
    cfg: &ExperimentConfig,
    scale: f64,
    out: &mut Vec<IterationRecord>,
) -> Result<()> {
    let (mut x, rep) = prox_solve(problem, &cfg.prox)?;
    out.push(record(inst, scale, &x, &rep)?);
    for _ in 0..cfg.reweight_iters {
        let w = match update_weights_irw_with(&x, inst.tau, inst.m, cfg.homotopy.reweight_epsilon) {
            Ok(w) => w,
            Err(Error::DegenerateWeights) => vec![inst.tau; inst.n],
            Err(e) => return Err(e),
        };
        let (next, rep) = prox_solve_warm(&problem.with_weights(w)?, &x, &cfg.prox)?;
        x = next;
        out.push(record(inst, scale, &x, &rep)?);
    }
    Ok(())
}

fn run_solver(
    kind: SolverKind,
    inst: &Instance,
    cfg: &ExperimentConfig,
    out: &mut Vec<IterationRecord>,
) -> Result<()> {
    let problem = WeightedProblem::uniform(inst.a.clone(), inst.y.clone(), inst.tau)?;
    let scale = correlation_scale(&inst.a, &inst.y).max(f64::MIN_POSITIVE);
    match kind {
        SolverKind::Lasso => {
            let (x, rep) = solve_lasso(&problem, &cfg.homotopy)?;
            out.push(record(inst, scale, &x, &rep)?);
        }
        SolverKind::Irw => {
            let (_, rounds) = solve_irw(&problem, cfg.reweight_iters, &cfg.homotopy)?;
            for r in &rounds {
                out.push(record(inst, scale, &r.x, &r.report)?);
            }
        }
        SolverKind::Arw => {
            let (x, _, rep) = solve_arw(&problem, cfg.arw_policy, &cfg.homotopy)?;
            out.push(record(inst, scale, &x, &rep)?);
        }
        SolverKind::Prox => prox_rounds(inst, &problem, cfg, scale, out)?,
        SolverKind::ProxAdaptive => {
            let (x, _, rep) = prox_solve_adaptive(&inst.a, &inst.y, inst.tau, &cfg.prox)?;
            out.push(record(inst, scale, &x, &rep)?);
        }
    }
    Ok(())
}

fn run_trial(cfg: &ExperimentConfig, n: usize, m: usize, trial: usize) -> Vec<TrialResult> {
    let seed = cfg.trial_seed(n, m, trial);
    let instance = Instance::generate(cfg.kind, n, m, cfg.snr_db, seed);
    cfg.solvers
        .iter()
        .map(|&solver| {
            let mut iterations = Vec::new();
            let outcome = instance
                .as_ref()
                .map_err(|e| Error::InvalidInput(e.to_string()))
                .and_then(|inst| run_solver(solver, inst, cfg, &mut iterations));
            let error = outcome.err().map(|e| e.to_string());
            if error.is_some() && iterations.is_empty() {
                iterations.push(IterationRecord {
                    ser_db: f64::NAN,
                    matvec: f64::NAN,
                    wall_ms: f64::NAN,
                    kkt_residual: f64::NAN,
                    failed: true,
                });
            }
            TrialResult {
                trial_id: trial,
                solver,
                n,
                m,
                snr_db: cfg.snr_db,
                iterations,
                error,
            }
        })
        .collect()
}

/// Runs every configured solver on every trial of every cell.
///
/// Solver failures are recorded in the affected result and never abort the
/// run. Results are ordered by cell, trial and solver.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialResult>> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize, usize)> = cfg
        .cells()
        .into_iter()
        .flat_map(|(n, m)| (0..cfg.trials).map(move |t| (n, m, t)))
        .collect();
    let work = || -> Vec<TrialResult> {
        jobs.par_iter()
            .flat_map_iter(|&(n, m, t)| run_trial(cfg, n, m, t))
            .collect()
    };
    let results = match cfg.jobs {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?
            .install(work),
        None => work(),
    };
    Ok(results)
}

/// One line of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub solver: SolverKind,
    pub n: usize,
    pub m: usize,
    pub iter: usize,
    pub metric: &'static str,
    pub mean: f64,
    pub stddev: f64,
    pub count: usize,
}

/// Mean and deviation per solver, cell, iteration and metric.
///
/// Failed rows are left out of every metric except `failed`, whose mean is
/// the failure rate over all rows. `matvec_cumulative` is the cost of all
/// iterations up to and including the row's.
pub fn summarize(results: &[TrialResult]) -> Vec<SummaryRow> {
    type Key = (SolverKind, usize, usize, usize);
    let mut groups: BTreeMap<Key, Vec<(&IterationRecord, f64)>> = BTreeMap::new();
    for r in results {
        let mut cumulative = 0.0;
        for (k, it) in r.iterations.iter().enumerate() {
            cumulative += it.matvec;
            groups
                .entry((r.solver, r.n, r.m, k))
                .or_default()
                .push((it, cumulative));
        }
    }
    let mut rows = Vec::new();
    for ((solver, n, m, iter), items) in groups {
        let ok = || items.iter().filter(|(it, _)| !it.failed);
        let metrics: [(&'static str, Stats); 6] = [
            ("ser_db", Stats::of(ok().map(|(it, _)| it.ser_db))),
            ("matvec", Stats::of(ok().map(|(it, _)| it.matvec))),
            ("matvec_cumulative", Stats::of(ok().map(|(_, c)| *c))),
            ("wall_ms", Stats::of(ok().map(|(it, _)| it.wall_ms))),
            ("kkt_residual", Stats::of(ok().map(|(it, _)| it.kkt_residual))),
            (
                "failed",
                Stats::of(items.iter().map(|(it, _)| if it.failed { 1.0 } else { 0.0 })),
            ),
        ];
        for (metric, s) in metrics {
            rows.push(SummaryRow {
                solver,
                n,
                m,
                iter,
                metric,
                mean: s.mean,
                stddev: s.stddev,
                count: s.count,
            });
        }
    }
    rows
}

#[derive(Serialize)]
struct TrialRow {
    trial_id: usize,
    solver: SolverKind,
    n: usize,
    m: usize,
    snr_db: f64,
    iter: usize,
    ser_db: f64,
    matvec: f64,
    wall_ms: f64,
    kkt_residual: f64,
    failed: bool,
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::InvalidInput(format!("{}: {other:?}", path.display())),
    }
}

/// Writes one row per recorded iteration.
pub fn write_trials_csv<W: Write>(out: W, results: &[TrialResult]) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        for (iter, it) in r.iterations.iter().enumerate() {
            w.serialize(TrialRow {
                trial_id: r.trial_id,
                solver: r.solver,
                n: r.n,
                m: r.m,
                snr_db: r.snr_db,
                iter,
                ser_db: it.ser_db,
                matvec: it.matvec,
                wall_ms: it.wall_ms,
                kkt_residual: it.kkt_residual,
                failed: it.failed || r.error.is_some(),
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(out: W, rows: &[SummaryRow]) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `trials.csv` and `summary.csv` into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, results: &[TrialResult]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let trials = dir.join("trials.csv");
    let file = std::fs::File::create(&trials).map_err(|e| Error::io(&trials, e))?;
    write_trials_csv(std::io::BufWriter::new(file), results).map_err(|e| csv_error(&trials, e))?;
    let summary = dir.join("summary.csv");
    let file = std::fs::File::create(&summary).map_err(|e| Error::io(&summary, e))?;
    write_summary_csv(std::io::BufWriter::new(file), &summarize(results))
        .map_err(|e| csv_error(&summary, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smoke(solvers: Vec<SolverKind>, trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            n: vec![64],
            m_divisors: vec![2.0],
            trials,
            reweight_iters: 2,
            solvers,
            seed: 5,
            ..Default::default()
        }
    }

    #[test]
    fn measurement_rounding() {
        assert_eq!(measurement_count(256, 2.0), 128);
        assert_eq!(measurement_count(256, 2.5), 102);
        assert_eq!(measurement_count(256, 3.0), 86);
        assert_eq!(measurement_count(256, 3.5), 74);
        assert_eq!(measurement_count(256, 4.0), 64);
    }

    #[test]
    fn single_lasso_trial() {
        let res = run_experiment(&smoke(vec![SolverKind::Lasso], 1)).unwrap();
        assert_eq!(res.len(), 1);
        assert_eq!(res[0].iterations.len(), 1);
        assert!(!res[0].failed(), "{res:?}");
    }

    #[test]
    fn iteration_counts_per_solver() {
        let res = run_experiment(&smoke(SolverKind::ALL.to_vec(), 1)).unwrap();
        let lens: Vec<usize> = res.iter().map(|r| r.iterations.len()).collect();
        assert_eq!(lens, vec![1, 3, 1, 3, 1]);
    }

    #[test]
    fn repeated_runs_agree() {
        let cfg = smoke(vec![SolverKind::Irw, SolverKind::Arw], 3);
        let strip = |v: Vec<TrialResult>| -> Vec<(f64, f64)> {
            v.iter()
                .flat_map(|r| r.iterations.iter().map(|i| (i.ser_db, i.matvec)))
                .collect()
        };
        assert_eq!(
            strip(run_experiment(&cfg).unwrap()),
            strip(run_experiment(&cfg).unwrap())
        );
    }

    #[test]
    fn config_round_trip_and_validation() {
        let cfg = ExperimentConfig::from_toml_str(
            "kind = \"heavisine\"\nn = [128]\nm_divisors = [4.0]\ntrials = 3\nsolvers = [\"arw\"]\narw_policy = \"hybrid:4\"\n",
        )
        .unwrap();
        assert_eq!(cfg.kind, SignalKind::HeaviSine);
        assert_eq!(cfg.cells(), vec![(128, 32)]);
        assert_eq!(cfg.arw_policy, WeightPolicy::Hybrid { switch_step: 4 });
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(again.to_toml_string(), cfg.to_toml_string());
        assert!(ExperimentConfig::from_toml_str("n = [100]").is_err());
        assert!(ExperimentConfig::from_toml_str("trials = 0").is_err());
        assert!(ExperimentConfig::from_toml_str("solvers = [\"cg\"]").is_err());
        assert!(ExperimentConfig::from_toml_str("colour = 1").is_err());
    }

    #[test]
    fn summary_excludes_failures() {
        let rec = |ser: f64, failed: bool| IterationRecord {
            ser_db: ser,
            matvec: 2.0,
            wall_ms: 0.0,
            kkt_residual: 0.0,
            failed,
        };
        let mk = |id, it| TrialResult {
            trial_id: id,
            solver: SolverKind::Lasso,
            n: 16,
            m: 8,
            snr_db: 40.0,
            iterations: vec![it],
            error: None,
        };
        let rows = summarize(&[mk(0, rec(10.0, false)), mk(1, rec(20.0, false)), mk(2, rec(99.0, true))]);
        let get = |name: &str| rows.iter().find(|r| r.metric == name).unwrap().clone();
        assert_eq!(get("ser_db").mean, 15.0);
        assert_eq!(get("ser_db").count, 2);
        assert!((get("failed").mean - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(get("failed").count, 3);
    }

    #[test]
    fn trials_csv_header() {
        let res = run_experiment(&smoke(vec![SolverKind::Lasso], 1)).unwrap();
        let mut buf = Vec::new();
        write_trials_csv(&mut buf, &res).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "trial_id,solver,n,m,snr_db,iter,ser_db,matvec,wall_ms,kkt_residual,failed\n0,lasso,64,32,"
        ));
    }
}
