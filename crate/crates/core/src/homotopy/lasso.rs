//! The weighted LASSO homotopy.
//!
//! Weights are written as `w = t·ρ` with a fixed profile `ρ = w/τ` and a
//! scalar level `t`. The path starts at `t₀ = max_i |a_iᵀy| / ρ_i`, where zero
//! is optimal, and lowers `t` to `τ`. Uniform weights give `ρ = 1` and the
//! classical single-parameter path.

use std::time::Instant;

use super::{
    check_step, kkt_residual, resolve_step, ActiveSetState, Breakpoint, IterationResult,
    Observer, SolveReport, SolverOptions, StepKind, StepOutcome, WeightedProblem,
};
use crate::error::{Error, PartialSolution, Result};
use crate::linalg::CountedOperator;

/// `∂x` on the support: `(A_ΓᵀA_Γ)⁻¹ (ρ_Γ ⊙ z)`.
pub fn lasso_direction(state: &ActiveSetState, profile: &[f64]) -> Result<Vec<f64>> {
    let rhs: Vec<f64> = state
        .support()
        .iter()
        .zip(state.signs())
        .map(|(&j, &z)| profile[j] * z)
        .collect();
    state.direction(&rhs)
}

/// Length of the next segment when the level drops from `level` toward `target`.
///
/// Consumes one `AᵀA` application for `d = AᵀA ∂x`.
pub fn lasso_step_size(
    state: &ActiveSetState,
    direction: Vec<f64>,
    level: f64,
    target: f64,
    profile: &[f64],
    op: &mut CountedOperator<'_>,
) -> Result<StepOutcome> {
    let rate = state.rate(op, &direction)?;
    let entry = state.entry_step(&rate, |i| (level * profile[i], -profile[i]));
    let shrink = state.shrink_step(&direction);
    let (kind, step_size) = resolve_step(entry, shrink, level - target);
    Ok(StepOutcome {
        kind,
        step_size,
        direction,
        rate,
    })
}

/// Solves the weighted problem by following the path from zero.
pub fn solve_lasso(problem: &WeightedProblem, opts: &SolverOptions) -> Result<(Vec<f64>, SolveReport)> {
    solve_lasso_observed(problem, opts, &mut |_| {})
}

/// [`solve_lasso`], reporting every committed breakpoint to `observer`.
pub fn solve_lasso_observed(
    problem: &WeightedProblem,
    opts: &SolverOptions,
    observer: Observer<'_>,
) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let mut op = CountedOperator::new(problem.a());
    let (state, steps) = lasso_path(&mut op, problem, opts, observer)?;
    let x = state.x().to_vec();
    let report = SolveReport {
        steps,
        ata: op.counter().ata(),
        kkt_residual: kkt_residual(problem.a(), problem.y(), problem.weights(), &x),
        support_size: state.support().len(),
        wall: start.elapsed(),
    };
    Ok((x, report))
}

/// Runs the path and hands back the walker for warm starts.
pub(crate) fn lasso_path(
    op: &mut CountedOperator<'_>,
    problem: &WeightedProblem,
    opts: &SolverOptions,
    observer: Observer<'_>,
) -> Result<(ActiveSetState, usize)> {
    let a = problem.a();
    let tau = problem.tau();
    let profile: Vec<f64> = problem.weights().iter().map(|w| w / tau).collect();
    let mut state = ActiveSetState::new(op, problem.y(), opts)?;

    let (lead, t0) = state
        .correlations()
        .iter()
        .zip(&profile)
        .map(|(p, r)| p.abs() / r)
        .enumerate()
        .fold((0, 0.0), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    if t0 <= tau {
        return Ok((state, 0));
    }
    let sign = -super::sign_of(state.correlations()[lead]);
    state.add(a, lead, sign)?;

    let cap = opts.step_cap(a.rows(), a.cols());
    let mut level = t0;
    let mut steps = 0;
    loop {
        if steps >= cap {
            let partial = PartialSolution {
                x: state.x().to_vec(),
                weights: profile.iter().map(|r| level * r).collect(),
                report: SolveReport {
                    steps,
                    ata: op.counter().ata(),
                    kkt_residual: f64::NAN,
                    support_size: state.support().len(),
                    wall: Default::default(),
                },
            };
            return Err(Error::MaxSteps {
                limit: cap,
                partial: Box::new(partial),
            });
        }
        let direction = lasso_direction(&state, &profile)?;
        let outcome = lasso_step_size(&state, direction, level, tau, &profile, op)?;
        check_step(steps, outcome.step_size)?;
        let kind = state.commit(a, &outcome)?;
        steps += 1;
        level = match kind {
            StepKind::ReachedTarget => tau,
            _ => (level - outcome.step_size).max(tau),
        };
        let weights: Vec<f64> = profile.iter().map(|r| level * r).collect();
        observer(&Breakpoint {
            step: steps,
            kind,
            x: state.x(),
            weights: &weights,
            support: state.support(),
        });
        if kind == StepKind::ReachedTarget {
            break;
        }
    }
    Ok((state, steps))
}

/// Convenience wrapper used by the reweighting driver for its first round.
pub(crate) fn cold_round(
    op: &mut CountedOperator<'_>,
    problem: &WeightedProblem,
    opts: &SolverOptions,
    observer: Observer<'_>,
) -> Result<(ActiveSetState, IterationResult)> {
    let start = Instant::now();
    let before = op.counter().ata();
    let (state, steps) = lasso_path(op, problem, opts, observer)?;
    let x = state.x().to_vec();
    let result = IterationResult {
        report: SolveReport {
            steps,
            ata: op.counter().ata() - before,
            kkt_residual: kkt_residual(problem.a(), problem.y(), problem.weights(), &x),
            support_size: state.support().len(),
            wall: start.elapsed(),
        },
        weights: problem.weights().to_vec(),
        x,
    };
    Ok((state, result))
}
