//! Iterative reweighting where each round is a short homotopy from the
//! previous solution, compared against re-solving every round from zero.

use l1homotopy::bench::ser_db;
use l1homotopy::homotopy::lasso::solve_lasso;
use l1homotopy::homotopy::reweight::solve_irw;
use l1homotopy::homotopy::{SolverOptions, WeightedProblem};
use l1homotopy::signal::{Instance, SignalKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = Instance::generate(SignalKind::Blocks, 256, 86, 40.0, 3)?;
    let problem = WeightedProblem::uniform(inst.a.clone(), inst.y.clone(), inst.tau)?;
    let opts = SolverOptions::default();

    let (_, rounds) = solve_irw(&problem, 5, &opts)?;
    println!("round  warm steps  cold steps  SER (dB)");
    for (k, r) in rounds.iter().enumerate() {
        let cold = solve_lasso(&problem.with_weights(r.weights.clone())?, &opts)?.1.steps;
        println!(
            "{k:>5}  {:>10}  {:>10}  {:>8.2}",
            r.report.steps,
            cold,
            ser_db(&inst.xbar, &r.x)?
        );
    }
    let total: f64 = rounds.iter().map(|r| r.report.ata).sum();
    println!("total cost: {total} AᵀA applications");
    Ok(())
}
