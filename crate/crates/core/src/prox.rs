//! Iterative shrinkage-thresholding for the weighted problem.
//!
//! Each inner iteration takes a gradient step on the quadratic and applies the
//! weighted soft threshold:
//!
//! ```text
//! x ← soft(x − Aᵀ(Ax − y)/L, w/L)
//! ```
//!
//! Cold solves run a continuation: the weights are scaled by a factor `κ` that
//! starts where zero is optimal and drops geometrically to `1`. Intermediate
//! levels are solved loosely, the last one to `grad_tol`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, PartialSolution, Result};
use crate::homotopy::{kkt_from_correlations, objective, SolveReport, WeightedProblem};
use crate::linalg::{norm1, norm2, norm_inf, CountedOperator, DenseMatrix};

const SAFETY: f64 = 1.05;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ProxOptions {
    /// Step constant; estimated by power iteration when absent.
    pub lipschitz: Option<f64>,
    pub power_iters: usize,
    /// Final optimality tolerance, relative to `‖Aᵀy‖∞`.
    pub grad_tol: f64,
    /// Tolerance for intermediate continuation levels, same scaling.
    pub level_tol: f64,
    pub max_inner: usize,
    pub continuation_factor: f64,
}

impl Default for ProxOptions {
    fn default() -> Self {
        ProxOptions {
            lipschitz: None,
            power_iters: 50,
            grad_tol: 1e-8,
            level_tol: 1e-3,
            max_inner: 200_000,
            continuation_factor: 4.0,
        }
    }
}

pub fn soft_threshold(u: f64, alpha: f64) -> f64 {
    if u > alpha {
        u - alpha
    } else if u < -alpha {
        u + alpha
    } else {
        0.0
    }
}

/// Largest eigenvalue of `AᵀA` by power iteration, times `1.05`.
pub fn estimate_lipschitz(a: &DenseMatrix, iters: usize) -> f64 {
    let mut op = CountedOperator::new(a);
    power_iteration(&mut op, iters)
}

fn power_iteration(op: &mut CountedOperator<'_>, iters: usize) -> f64 {
    let n = op.matrix().cols();
    if n == 0 {
        return SAFETY;
    }
    // deterministic start with no special alignment to coordinate axes
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 13) as f64 / 13.0).collect();
    let mut lambda = 0.0;
    for _ in 0..iters.max(1) {
        let nv = norm2(&v);
        if nv == 0.0 {
            break;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        let av = op.apply(&v).expect("length matches");
        let next = op.apply_t(&av).expect("length matches");
        lambda = norm2(&av).powi(2);
        v = next;
    }
    if lambda > 0.0 {
        lambda * SAFETY
    } else {
        SAFETY
    }
}

struct Engine<'a, 'o> {
    op: CountedOperator<'a>,
    y: &'a [f64],
    inv_l: f64,
    iters: usize,
    max_inner: usize,
    trace: Option<&'o mut Vec<f64>>,
}

impl Engine<'_, '_> {
    fn gradient(&mut self, x: &[f64]) -> Vec<f64> {
        let mut r = self.op.apply(x).expect("length matches");
        r.iter_mut().zip(self.y).for_each(|(u, v)| *u -= v);
        self.op.apply_t(&r).expect("length matches")
    }

    /// Iterates under `w` until the residual drops to `tol`; `false` on cap.
    fn run(&mut self, x: &mut [f64], w: &[f64], tol: f64) -> bool {
        loop {
            let g = self.gradient(x);
            if kkt_from_correlations(&g, w, x) <= tol {
                return true;
            }
            if self.iters >= self.max_inner {
                return false;
            }
            for ((xi, gi), wi) in x.iter_mut().zip(&g).zip(w) {
                *xi = soft_threshold(*xi - gi * self.inv_l, wi * self.inv_l);
            }
            self.iters += 1;
            if let Some(t) = self.trace.as_deref_mut() {
                t.push(objective(self.op.matrix(), self.y, w, x));
            }
        }
    }
}

fn levels(kappa0: f64, factor: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = kappa0 / factor;
    while k > 1.0 && factor.is_finite() {
        out.push(k);
        k /= factor;
    }
    out.push(1.0);
    out
}

fn validate(opts: &ProxOptions) -> Result<()> {
    if let Some(l) = opts.lipschitz {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidInput(format!("step constant must be positive, got {l}")));
        }
    }
    if !(opts.continuation_factor > 1.0) {
        return Err(Error::InvalidInput("continuation factor must exceed 1".into()));
    }
    Ok(())
}

fn report(engine: &Engine<'_, '_>, g_kkt: f64, x: &[f64], start: Instant) -> SolveReport {
    SolveReport {
        steps: engine.iters,
        ata: engine.op.counter().ata(),
        kkt_residual: g_kkt,
        support_size: x.iter().filter(|v| **v != 0.0).count(),
        wall: start.elapsed(),
    }
}

fn capped(limit: usize, x: Vec<f64>, weights: Vec<f64>, report: SolveReport) -> Error {
    Error::MaxSteps {
        limit,
        partial: Box::new(PartialSolution { x, weights, report }),
    }
}

fn solve_inner(
    problem: &WeightedProblem,
    x0: Option<&[f64]>,
    opts: &ProxOptions,
    trace: Option<&mut Vec<f64>>,
) -> Result<(Vec<f64>, SolveReport)> {
    validate(opts)?;
    let start = Instant::now();
    let a = problem.a();
    let w = problem.weights();
    let mut op = CountedOperator::new(a);
    let l = match opts.lipschitz {
        Some(l) => l,
        None => power_iteration(&mut op, opts.power_iters),
    };
    let mut engine = Engine {
        op,
        y: problem.y(),
        inv_l: 1.0 / l,
        iters: 0,
        max_inner: opts.max_inner,
        trace,
    };
    let aty = engine.op.apply_t(problem.y())?;
    let scale = norm_inf(&aty);
    let mut x = match x0 {
        Some(x0) if x0.len() == a.cols() => x0.to_vec(),
        Some(_) => return Err(Error::contract("warm start length does not match columns")),
        None => vec![0.0; a.cols()],
    };
    if scale == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok((x, SolveReport::default()));
    }

    let schedule = if x0.is_some() {
        vec![1.0]
    } else {
        let kappa0 = aty
            .iter()
            .zip(w)
            .map(|(c, wi)| c.abs() / wi)
            .fold(0.0, f64::max);
        levels(kappa0, opts.continuation_factor)
    };
    let last = schedule.len() - 1;
    for (k, &kappa) in schedule.iter().enumerate() {
        let wk: Vec<f64> = w.iter().map(|v| v * kappa).collect();
        let tol = if k == last { opts.grad_tol } else { opts.level_tol.max(opts.grad_tol) };
        if !engine.run(&mut x, &wk, tol * scale) {
            let kkt = crate::homotopy::kkt_residual(a, problem.y(), w, &x);
            let rep = report(&engine, kkt, &x, start);
            return Err(capped(opts.max_inner, x, w.to_vec(), rep));
        }
    }
    let kkt = crate::homotopy::kkt_residual(a, problem.y(), w, &x);
    Ok((x.clone(), report(&engine, kkt, &x, start)))
}

/// Solves from zero with continuation.
pub fn prox_solve(problem: &WeightedProblem, opts: &ProxOptions) -> Result<(Vec<f64>, SolveReport)> {
    solve_inner(problem, None, opts, None)
}

/// Solves from `x0` at the target weights, without continuation.
pub fn prox_solve_warm(
    problem: &WeightedProblem,
    x0: &[f64],
    opts: &ProxOptions,
) -> Result<(Vec<f64>, SolveReport)> {
    solve_inner(problem, Some(x0), opts, None)
}

/// [`prox_solve`] that also records the objective under the current level's
/// weights after every inner iteration.
pub fn prox_solve_traced(
    problem: &WeightedProblem,
    opts: &ProxOptions,
    trace: &mut Vec<f64>,
) -> Result<(Vec<f64>, SolveReport)> {
    solve_inner(problem, None, opts, Some(trace))
}

/// Continuation on a uniform level `λ` from `‖Aᵀy‖∞` down to `τ`, with the
/// weights reset to `min(λ, λ/(β|x_i|))` at every level change.
///
/// Returns the iterate, the final weights, and the report. The residual in
/// the report is measured under the final weights.
pub fn prox_solve_adaptive(
    a: &DenseMatrix,
    y: &[f64],
    tau: f64,
    opts: &ProxOptions,
) -> Result<(Vec<f64>, Vec<f64>, SolveReport)> {
    validate(opts)?;
    let problem = WeightedProblem::uniform(a.clone(), y.to_vec(), tau)?;
    let start = Instant::now();
    let mut op = CountedOperator::new(a);
    let l = match opts.lipschitz {
        Some(l) => l,
        None => power_iteration(&mut op, opts.power_iters),
    };
    let mut engine = Engine {
        op,
        y: problem.y(),
        inv_l: 1.0 / l,
        iters: 0,
        max_inner: opts.max_inner,
        trace: None,
    };
    let scale = norm_inf(&engine.op.apply_t(y)?);
    let n = a.cols();
    let mut x = vec![0.0; n];
    if scale == 0.0 {
        return Ok((x, vec![tau; n], SolveReport::default()));
    }
    let schedule = levels(scale / tau, opts.continuation_factor);
    let last = schedule.len() - 1;
    let mut w = vec![tau; n];
    for (k, &kappa) in schedule.iter().enumerate() {
        let lambda = kappa * tau;
        w = adaptive_weights(&x, lambda, a.rows());
        let tol = if k == last { opts.grad_tol } else { opts.level_tol.max(opts.grad_tol) };
        if !engine.run(&mut x, &w, tol * scale) {
            let kkt = crate::homotopy::kkt_residual(a, y, &w, &x);
            let rep = report(&engine, kkt, &x, start);
            return Err(capped(opts.max_inner, x, w, rep));
        }
    }
    let kkt = crate::homotopy::kkt_residual(a, y, &w, &x);
    let rep = report(&engine, kkt, &x, start);
    Ok((x, w, rep))
}

/// `min(λ, λ/(β|x_i|))` with `β = M‖x‖₂²/‖x‖₁²`; zero entries get `λ`.
pub fn adaptive_weights(x: &[f64], lambda: f64, m: usize) -> Vec<f64> {
    let l1 = norm1(x);
    if l1 == 0.0 {
        return vec![lambda; x.len()];
    }
    let l2 = norm2(x);
    let beta = m as f64 * l2 * l2 / (l1 * l1);
    x.iter()
        .map(|xi| {
            let mag = beta * xi.abs();
            if mag > 0.0 {
                lambda.min(lambda / mag)
            } else {
                lambda
            }
        })
        .collect()
}
