//! Follows the LASSO path on a small random problem and prints every
//! breakpoint: which column moved, the level reached, and the support size.
//!
//! ```text
//! cargo run --example lasso_path
//! ```

use l1homotopy::homotopy::lasso::solve_lasso_observed;
use l1homotopy::homotopy::{SolverOptions, StepKind, WeightedProblem};
use l1homotopy::signal::Instance;
use l1homotopy::signal::SignalKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = Instance::generate(SignalKind::Blocks, 64, 32, 40.0, 11)?;
    let problem = WeightedProblem::uniform(inst.a.clone(), inst.y.clone(), inst.tau)?;

    println!("{:>5}  {:<14} {:>12}  {:>7}", "step", "event", "level", "|supp|");
    let (x, report) = solve_lasso_observed(&problem, &SolverOptions::default(), &mut |bp| {
        let event = match bp.kind {
            StepKind::Add(i) => format!("add {i}"),
            StepKind::Remove(j) => format!("remove {j}"),
            StepKind::Exchange { entering, leaving } => format!("swap {leaving}->{entering}"),
            StepKind::ReachedTarget => "target".to_string(),
        };
        // uniform weights, so any entry is the current level
        println!("{:>5}  {:<14} {:>12.5e}  {:>7}", bp.step, event, bp.weights[0], bp.support.len());
    })?;

    let nnz = x.iter().filter(|v| **v != 0.0).count();
    println!(
        "\n{} steps, {} AᵀA, {} nonzeros, KKT residual {:.2e}",
        report.steps, report.ata, nnz, report.kkt_residual
    );
    Ok(())
}
