//! The proximal-gradient baseline: it reaches the same minimizer as the
//! homotopy, at a very different cost.

use l1homotopy::homotopy::lasso::solve_lasso;
use l1homotopy::homotopy::{SolverOptions, WeightedProblem};
use l1homotopy::prox::{prox_solve, prox_solve_adaptive, ProxOptions};
use l1homotopy::signal::{Instance, SignalKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = Instance::generate(SignalKind::Blocks, 256, 128, 40.0, 5)?;
    let problem = WeightedProblem::uniform(inst.a.clone(), inst.y.clone(), inst.tau)?;

    let (xh, rh) = solve_lasso(&problem, &SolverOptions::default())?;
    let tight = ProxOptions {
        grad_tol: 1e-12,
        ..Default::default()
    };
    let (xp, rp) = prox_solve(&problem, &tight)?;

    let gap = xh.iter().zip(&xp).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("homotopy: objective {:.10e}, {} AᵀA", problem.objective(&xh), rh.ata);
    println!("prox:     objective {:.10e}, {} AᵀA", problem.objective(&xp), rp.ata);
    println!("max |x_h - x_p| = {gap:.2e}");

    let (_, w, ra) = prox_solve_adaptive(&inst.a, &inst.y, inst.tau, &ProxOptions::default())?;
    let wmin = w.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("adaptive prox: {} AᵀA, weights in [{wmin:.3e}, {:.3e}]", ra.ata, inst.tau);
    Ok(())
}
