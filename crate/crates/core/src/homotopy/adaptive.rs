//! Single-pass homotopy with adaptively chosen weights.
//!
//! All weights start at `max_i |a_iᵀy|`, where zero is optimal. Each step
//! picks target weights `w̃` for the active set, moves the active weights
//! toward them (removing an element if one crosses zero on the way), then
//! admits the inactive index with the largest correlation and resets every
//! inactive weight to the largest correlation magnitude. The run ends once
//! no weight exceeds `τ`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{
    check_step, kkt_residual, sign_of, ActiveSetState, Breakpoint, Observer, SolveReport,
    SolverOptions, StepKind, StepOutcome, WeightedProblem,
};
use crate::error::{Error, PartialSolution, Result};
use super::reweight::{reweight_path, WeightTransition};
use crate::linalg::{norm1, norm2, CountedOperator};

pub const DEFAULT_HYBRID_SWITCH: usize = 10;

/// A signed support seen this many times marks the run as cycling.
const CYCLE_VISITS: u32 = 3;

/// How active-set targets are chosen at each step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum WeightPolicy {
    /// Every active target is half the largest active weight.
    HalfMax,
    /// `w̃_i = min(τ, τ / (β|x_i|))`.
    #[default]
    Reciprocal,
    /// [`WeightPolicy::HalfMax`] for the first `switch_step` steps, then
    /// [`WeightPolicy::Reciprocal`].
    Hybrid { switch_step: usize },
}

impl fmt::Display for WeightPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightPolicy::HalfMax => f.write_str("half-max"),
            WeightPolicy::Reciprocal => f.write_str("reciprocal"),
            WeightPolicy::Hybrid { switch_step } => write!(f, "hybrid:{switch_step}"),
        }
    }
}

impl FromStr for WeightPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase().replace('_', "-");
        match s.as_str() {
            "half-max" => Ok(WeightPolicy::HalfMax),
            "reciprocal" => Ok(WeightPolicy::Reciprocal),
            "hybrid" => Ok(WeightPolicy::Hybrid {
                switch_step: DEFAULT_HYBRID_SWITCH,
            }),
            other => match other.strip_prefix("hybrid:") {
                Some(k) => k
                    .parse()
                    .map(|switch_step| WeightPolicy::Hybrid { switch_step })
                    .map_err(|_| format!("bad hybrid switch step `{k}`")),
                None => Err(format!(
                    "unknown weight policy `{other}` (expected half-max, reciprocal or hybrid:<k>)"
                )),
            },
        }
    }
}

impl TryFrom<String> for WeightPolicy {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<WeightPolicy> for String {
    fn from(p: WeightPolicy) -> String {
        p.to_string()
    }
}

#[derive(Debug, Clone)]
pub struct AdaptiveWeightState {
    /// Current weights.
    pub w: Vec<f64>,
    /// Targets selected for the current step.
    pub w_target: Vec<f64>,
    pub policy: WeightPolicy,
    /// Steps committed so far.
    pub step: usize,
}

impl AdaptiveWeightState {
    pub fn new(w: Vec<f64>, policy: WeightPolicy) -> Self {
        AdaptiveWeightState {
            w_target: w.clone(),
            w,
            policy,
            step: 0,
        }
    }
}

/// `M‖x‖₂² / ‖x‖₁²`, or `1` for the zero vector.
fn support_proxy(x: &[f64], m: usize) -> f64 {
    let l1 = norm1(x);
    if l1 == 0.0 {
        return 1.0;
    }
    let l2 = norm2(x);
    m as f64 * l2 * l2 / (l1 * l1)
}

/// Full-length targets: the policy on the support, and
/// `max(max active target, τ)` everywhere else.
pub fn select_target_weights(
    state: &ActiveSetState,
    ws: &AdaptiveWeightState,
    tau: f64,
    m: usize,
) -> Vec<f64> {
    let policy = match ws.policy {
        WeightPolicy::Hybrid { switch_step } if ws.step < switch_step => WeightPolicy::HalfMax,
        WeightPolicy::Hybrid { .. } => WeightPolicy::Reciprocal,
        p => p,
    };
    let mut target = ws.w.clone();
    match policy {
        WeightPolicy::HalfMax => {
            let half = state
                .support()
                .iter()
                .map(|&j| ws.w[j])
                .fold(0.0, f64::max)
                / 2.0;
            for &j in state.support() {
                target[j] = half;
            }
        }
        _ => {
            let beta = support_proxy(state.x(), m);
            for &j in state.support() {
                let mag = beta * state.x()[j].abs();
                target[j] = if mag > 0.0 { tau.min(tau / mag) } else { tau };
            }
        }
    }
    let inactive = state
        .support()
        .iter()
        .map(|&j| target[j])
        .fold(tau, f64::max);
    for (i, t) in target.iter_mut().enumerate() {
        if !state.is_active(i) {
            *t = inactive;
        }
    }
    target
}

/// `∂x` on the support: `(A_ΓᵀA_Γ)⁻¹ (w − w̃)_Γ ⊙ z`.
pub fn arw_direction(state: &ActiveSetState, ws: &AdaptiveWeightState) -> Result<Vec<f64>> {
    let rhs: Vec<f64> = state
        .support()
        .iter()
        .zip(state.signs())
        .map(|(&j, &z)| (ws.w[j] - ws.w_target[j]) * z)
        .collect();
    state.direction(&rhs)
}

/// Selects targets, takes one step and commits it, including the weight
/// updates. Costs one `AᵀA` application.
pub fn arw_step(
    state: &mut ActiveSetState,
    ws: &mut AdaptiveWeightState,
    op: &mut CountedOperator<'_>,
    tau: f64,
) -> Result<StepOutcome> {
    let a = op.matrix();
    let m = a.rows();
    let barred = state.just_removed();
    ws.w_target = select_target_weights(state, ws, tau, m);
    let direction = arw_direction(state, ws)?;
    let rate = state.rate(op, &direction)?;

    let (kind, step_size) = match state.shrink_step(&direction) {
        Some((delta, j)) if delta <= 1.0 => (StepKind::Remove(j), delta),
        _ => (StepKind::ReachedTarget, 1.0),
    };
    check_step(ws.step, step_size)?;

    for &j in state.support() {
        ws.w[j] += step_size * (ws.w_target[j] - ws.w[j]);
    }
    let mut outcome = StepOutcome {
        kind,
        step_size,
        direction,
        rate,
    };
    outcome.kind = state.commit(a, &outcome)?;

    if outcome.kind == StepKind::ReachedTarget && state.support().len() < m.min(a.cols()) {
        let corr = state.correlations();
        let entering = (0..corr.len())
            .filter(|&i| !state.is_active(i) && Some(i) != barred)
            .max_by(|&i, &j| corr[i].abs().total_cmp(&corr[j].abs()));
        if let Some(i) = entering {
            let p = corr[i];
            outcome.kind = state.enter(a, i, -sign_of(p))?;
            ws.w[i] = p.abs();
        }
    }

    let ceiling = state
        .correlations()
        .iter()
        .fold(0.0, |acc: f64, p| acc.max(p.abs()));
    for i in 0..ws.w.len() {
        if !state.is_active(i) {
            ws.w[i] = ceiling;
        }
    }
    if !ceiling.is_finite() {
        return Err(Error::PathStall {
            step: ws.step,
            reason: "correlations are not finite".into(),
        });
    }
    ws.step += 1;
    Ok(outcome)
}

fn capped(
    cap: usize,
    state: &ActiveSetState,
    ws: &AdaptiveWeightState,
    op: &CountedOperator<'_>,
    start: Instant,
) -> Error {
    Error::MaxSteps {
        limit: cap,
        partial: Box::new(PartialSolution {
            x: state.x().to_vec(),
            weights: ws.w.clone(),
            report: SolveReport {
                steps: ws.step,
                ata: op.counter().ata(),
                kkt_residual: f64::NAN,
                support_size: state.support().len(),
                wall: start.elapsed(),
            },
        }),
    }
}

/// Ends a cycling run: the current targets, capped at `τ` on the support
/// and equal to `τ` elsewhere, are frozen and reached along the
/// fixed-target reweighting path.
fn settle(
    state: &mut ActiveSetState,
    ws: &mut AdaptiveWeightState,
    op: &mut CountedOperator<'_>,
    tau: f64,
    cap: usize,
    observer: Observer<'_>,
) -> Result<()> {
    let m = op.matrix().rows();
    let mut target = select_target_weights(state, ws, tau, m);
    for (i, t) in target.iter_mut().enumerate() {
        *t = if state.is_active(i) { t.min(tau) } else { tau };
    }
    let mut transition = WeightTransition::new(ws.w.clone(), target)?;
    let offset = ws.step;
    let steps = reweight_path(
        state,
        &mut transition,
        op,
        cap.saturating_sub(offset),
        &mut |b| {
            observer(&Breakpoint {
                step: offset + b.step,
                ..*b
            })
        },
    )?;
    ws.step += steps;
    ws.w_target = transition.w_new().to_vec();
    ws.w = ws.w_target.clone();
    Ok(())
}

/// Runs the adaptive path; the weights in `problem` are not used.
///
/// Returns the iterate, the final weights, and the report.
pub fn solve_arw(
    problem: &WeightedProblem,
    policy: WeightPolicy,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, Vec<f64>, SolveReport)> {
    solve_arw_observed(problem, policy, opts, &mut |_| {})
}

/// [`solve_arw`], reporting every committed step to `observer`.
pub fn solve_arw_observed(
    problem: &WeightedProblem,
    policy: WeightPolicy,
    opts: &SolverOptions,
    observer: Observer<'_>,
) -> Result<(Vec<f64>, Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let a = problem.a();
    let tau = problem.tau();
    let mut op = CountedOperator::new(a);
    let mut state = ActiveSetState::new(&mut op, problem.y(), opts)?;

    let corr = state.correlations();
    let (lead, lambda) = corr
        .iter()
        .map(|p| p.abs())
        .enumerate()
        .fold((0, 0.0), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    let n = a.cols();
    if lambda <= tau {
        let w = vec![if lambda > 0.0 { lambda } else { tau }; n];
        let report = SolveReport {
            steps: 0,
            ata: op.counter().ata(),
            kkt_residual: kkt_residual(a, problem.y(), &w, state.x()),
            support_size: 0,
            wall: start.elapsed(),
        };
        return Ok((state.x().to_vec(), w, report));
    }
    let sign = -sign_of(corr[lead]);
    state.add(a, lead, sign)?;
    let mut ws = AdaptiveWeightState::new(vec![lambda; n], policy);

    let cap = opts.step_cap(a.rows(), n);
    let mut seen: HashMap<Vec<(usize, bool)>, u32> = HashMap::new();
    while ws.w.iter().fold(0.0, |acc: f64, &v| acc.max(v)) > tau {
        if ws.step >= cap {
            return Err(capped(cap, &state, &ws, &op, start));
        }
        let outcome = arw_step(&mut state, &mut ws, &mut op, tau)?;
        observer(&Breakpoint {
            step: ws.step,
            kind: outcome.kind,
            x: state.x(),
            weights: &ws.w,
            support: state.support(),
        });
        let mut signature: Vec<(usize, bool)> = state
            .support()
            .iter()
            .zip(state.signs())
            .map(|(&j, &z)| (j, z > 0.0))
            .collect();
        signature.sort_unstable();
        let visits = seen.entry(signature).or_insert(0);
        *visits += 1;
        if *visits >= CYCLE_VISITS {
            settle(&mut state, &mut ws, &mut op, tau, cap, observer)?;
            break;
        }
    }

    let x = state.x().to_vec();
    let report = SolveReport {
        steps: ws.step,
        ata: op.counter().ata(),
        kkt_residual: kkt_residual(a, problem.y(), &ws.w, &x),
        support_size: state.support().len(),
        wall: start.elapsed(),
    };
    Ok((x, ws.w, report))
}
