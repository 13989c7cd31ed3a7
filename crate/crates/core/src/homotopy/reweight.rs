//! Warm-started reweighting.
//!
//! Given the solution for weights `w`, the solution for new weights `w̃` is
//! reached by following
//!
//! ```text
//! minimize  Σ [(1 − ε) w_i + ε w̃_i] |x_i| + ½‖Ax − y‖²
//! ```
//!
//! from `ε = 0` to `ε = 1`. When the weights change little, the support
//! changes little and the path has few breakpoints.

use std::time::Instant;

use super::lasso::cold_round;
use super::{
    check_step, kkt_residual, resolve_step, ActiveSetState, Breakpoint, IterationResult,
    Observer, SolveReport, SolverOptions, StepKind, StepOutcome, WeightedProblem,
};
use crate::error::{Error, PartialSolution, Result};
use crate::linalg::{norm1, norm2, CountedOperator};

/// A move from `w_old` to `w_new`, currently at `epsilon`.
#[derive(Debug, Clone)]
pub struct WeightTransition {
    w_old: Vec<f64>,
    w_new: Vec<f64>,
    epsilon: f64,
}

impl WeightTransition {
    pub fn new(w_old: Vec<f64>, w_new: Vec<f64>) -> Result<Self> {
        if w_old.len() != w_new.len() {
            return Err(Error::contract("weight vectors differ in length"));
        }
        if w_old.iter().chain(&w_new).any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput("weights must be positive and finite".into()));
        }
        Ok(WeightTransition {
            w_old,
            w_new,
            epsilon: 0.0,
        })
    }

    pub fn w_old(&self) -> &[f64] {
        &self.w_old
    }

    pub fn w_new(&self) -> &[f64] {
        &self.w_new
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn set_epsilon(&mut self, epsilon: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::contract(format!("epsilon {epsilon} outside [0, 1]")));
        }
        self.epsilon = epsilon;
        Ok(())
    }

    /// `(1 − ε) w + ε w̃`.
    pub fn blended(&self) -> Vec<f64> {
        self.w_old
            .iter()
            .zip(&self.w_new)
            .map(|(w, v)| (1.0 - self.epsilon) * w + self.epsilon * v)
            .collect()
    }
}

/// `∂x` on the support: `(A_ΓᵀA_Γ)⁻¹ (w − w̃)_Γ ⊙ z`.
pub fn irw_direction(state: &ActiveSetState, transition: &WeightTransition) -> Result<Vec<f64>> {
    let rhs: Vec<f64> = state
        .support()
        .iter()
        .zip(state.signs())
        .map(|(&j, &z)| (transition.w_old[j] - transition.w_new[j]) * z)
        .collect();
    state.direction(&rhs)
}

/// Length of the next segment in `ε`, capped at `1 − ε`.
pub fn irw_step_size(
    state: &ActiveSetState,
    direction: Vec<f64>,
    transition: &WeightTransition,
    op: &mut CountedOperator<'_>,
) -> Result<StepOutcome> {
    if transition.epsilon >= 1.0 {
        return Err(Error::contract("transition already complete"));
    }
    let rate = state.rate(op, &direction)?;
    let eps = transition.epsilon;
    let entry = state.entry_step(&rate, |i| {
        let (w, v) = (transition.w_old[i], transition.w_new[i]);
        ((1.0 - eps) * w + eps * v, v - w)
    });
    let shrink = state.shrink_step(&direction);
    let (kind, step_size) = resolve_step(entry, shrink, 1.0 - eps);
    Ok(StepOutcome {
        kind,
        step_size,
        direction,
        rate,
    })
}

/// Walks `transition` to `ε = 1`; returns the number of breakpoints.
pub(crate) fn reweight_path(
    state: &mut ActiveSetState,
    transition: &mut WeightTransition,
    op: &mut CountedOperator<'_>,
    cap: usize,
    observer: Observer<'_>,
) -> Result<usize> {
    let a = op.matrix();
    let mut steps = 0;
    while transition.epsilon < 1.0 {
        if steps >= cap {
            return Err(Error::MaxSteps {
                limit: cap,
                partial: Box::new(PartialSolution {
                    x: state.x().to_vec(),
                    weights: transition.blended(),
                    report: SolveReport {
                        steps,
                        ata: op.counter().ata(),
                        kkt_residual: f64::NAN,
                        support_size: state.support().len(),
                        wall: Default::default(),
                    },
                }),
            });
        }
        let direction = irw_direction(state, transition)?;
        let outcome = irw_step_size(state, direction, transition, op)?;
        check_step(steps, outcome.step_size)?;
        let kind = state.commit(a, &outcome)?;
        steps += 1;
        transition.epsilon = match kind {
            StepKind::ReachedTarget => 1.0,
            _ => (transition.epsilon + outcome.step_size).min(1.0),
        };
        let weights = transition.blended();
        observer(&Breakpoint {
            step: steps,
            kind,
            x: state.x(),
            weights: &weights,
            support: state.support(),
        });
    }
    Ok(steps)
}

/// `w_i = τ / (β|x_i| + 1)` with `β = M‖x‖₂² / ‖x‖₁²`.
pub fn update_weights_irw(x_prev: &[f64], tau: f64, m: usize) -> Result<Vec<f64>> {
    update_weights_irw_with(x_prev, tau, m, 1.0)
}

/// [`update_weights_irw`] with a configurable additive constant.
pub fn update_weights_irw_with(x_prev: &[f64], tau: f64, m: usize, eps_reg: f64) -> Result<Vec<f64>> {
    let l1 = norm1(x_prev);
    if l1 == 0.0 {
        return Err(Error::DegenerateWeights);
    }
    let l2 = norm2(x_prev);
    let beta = m as f64 * l2 * l2 / (l1 * l1);
    Ok(x_prev
        .iter()
        .map(|x| tau / (beta * x.abs() + eps_reg))
        .collect())
}

/// Cold solve under `problem`'s weights, then `reweight_iters` warm rounds.
///
/// Returns the final iterate and one result per round.
pub fn solve_irw(
    problem: &WeightedProblem,
    reweight_iters: usize,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, Vec<IterationResult>)> {
    solve_irw_observed(problem, reweight_iters, opts, &mut |_| {})
}

/// [`solve_irw`] reporting every breakpoint of every round.
pub fn solve_irw_observed(
    problem: &WeightedProblem,
    reweight_iters: usize,
    opts: &SolverOptions,
    observer: Observer<'_>,
) -> Result<(Vec<f64>, Vec<IterationResult>)> {
    let a = problem.a();
    let tau = problem.tau();
    let cap = opts.step_cap(a.rows(), a.cols());
    let mut op = CountedOperator::new(a);
    let (mut state, first) = cold_round(&mut op, problem, opts, &mut *observer)?;
    let mut weights = first.weights.clone();
    let mut rounds = vec![first];

    for _ in 0..reweight_iters {
        let start = Instant::now();
        let before = op.counter().ata();
        let w_new = match update_weights_irw_with(state.x(), tau, a.rows(), opts.reweight_epsilon) {
            Ok(w) => w,
            Err(Error::DegenerateWeights) => vec![tau; a.cols()],
            Err(e) => return Err(e),
        };
        let mut transition = WeightTransition::new(weights, w_new)?;
        let steps = reweight_path(&mut state, &mut transition, &mut op, cap, &mut *observer)?;
        weights = transition.w_new;
        let x = state.x().to_vec();
        rounds.push(IterationResult {
            report: SolveReport {
                steps,
                ata: op.counter().ata() - before,
                kkt_residual: kkt_residual(a, problem.y(), &weights, &x),
                support_size: state.support().len(),
                wall: start.elapsed(),
            },
            weights: weights.clone(),
            x,
        });
    }
    let x = rounds.last().expect("at least one round").x.clone();
    Ok((x, rounds))
}
