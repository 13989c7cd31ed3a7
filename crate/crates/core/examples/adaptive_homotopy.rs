//! One homotopy run that picks its own weights, for each weight policy,
//! next to plain LASSO and five rounds of iterative reweighting.
//!
//! Pass `heavisine` as the first argument to switch signal class.

use l1homotopy::bench::ser_db;
use l1homotopy::homotopy::adaptive::{solve_arw, WeightPolicy};
use l1homotopy::homotopy::lasso::solve_lasso;
use l1homotopy::homotopy::reweight::solve_irw;
use l1homotopy::homotopy::{SolverOptions, WeightedProblem};
use l1homotopy::signal::{Instance, SignalKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kind: SignalKind = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "blocks".into())
        .parse()?;
    let opts = SolverOptions::default();
    let policies = ["reciprocal", "half-max", "hybrid:10"];

    let mut sums = vec![0.0; 2 + policies.len()];
    let mut costs = vec![0.0; 2 + policies.len()];
    let trials = 20;
    for seed in 0..trials {
        let inst = Instance::generate(kind, 256, 128, 40.0, seed)?;
        let problem = WeightedProblem::uniform(inst.a.clone(), inst.y.clone(), inst.tau)?;

        let (x, rep) = solve_lasso(&problem, &opts)?;
        sums[0] += ser_db(&inst.xbar, &x)?;
        costs[0] += rep.ata;
        let (x, rounds) = solve_irw(&problem, 5, &opts)?;
        sums[1] += ser_db(&inst.xbar, &x)?;
        costs[1] += rounds.iter().map(|r| r.report.ata).sum::<f64>();
        for (k, p) in policies.iter().enumerate() {
            let policy: WeightPolicy = p.parse()?;
            let (x, _, rep) = solve_arw(&problem, policy, &opts)?;
            sums[2 + k] += ser_db(&inst.xbar, &x)?;
            costs[2 + k] += rep.ata;
        }
    }

    let names = ["lasso", "irw x5"].into_iter().chain(policies.iter().copied());
    println!("{kind}, N = 256, M = 128, {trials} trials");
    for (name, (s, c)) in names.zip(sums.iter().zip(&costs)) {
        let t = trials as f64;
        println!("{name:<12} SER {:>6.2} dB   cost {:>6.1} AᵀA", s / t, c / t);
    }
    Ok(())
}
