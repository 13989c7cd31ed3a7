//! Homotopy path solvers for weighted `ℓ1` problems
//!
//! ```text
//! minimize  Σ w_i |x_i| + ½‖Ax − y‖²
//! ```
//!
//! All three solvers walk a piecewise-linear path on which the support and
//! sign pattern of the iterate are constant between breakpoints:
//!
//! * [`lasso`]: shrink a scalar multiple of a fixed weight profile from the
//!   level where `x = 0` is optimal down to the target weights.
//! * [`reweight`]: morph one weight vector into another, starting from the
//!   solution under the old weights (warm start).
//! * [`adaptive`]: a single path on which every weight is shrunk adaptively,
//!   fast on the support and slow elsewhere.
//!
//! They share the [`ActiveSetState`] walker: iterate, ordered support, sign
//! pattern, a rank-one-updatable Gram factor, and the cached correlation
//! vector `p = Aᵀ(Ax − y)`. Each step costs one product with `A` and one with
//! `Aᵀ` (the vector `d = AᵀA ∂x`), which keeps `p` current without ever
//! forming a fresh residual.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    norm_inf, CountedOperator, DenseMatrix, FactorMode, GramFactor, DEFAULT_REFACTOR_PERIOD,
};

pub mod adaptive;
pub mod lasso;
pub mod reweight;

/// Two step lengths closer than this (relative) are treated as simultaneous.
pub(crate) const TIE_TOL: f64 = 1e-12;

/// An instance of the weighted `ℓ1` program.
#[derive(Debug, Clone)]
pub struct WeightedProblem {
    a: DenseMatrix,
    y: Vec<f64>,
    w: Vec<f64>,
    tau: f64,
}

impl WeightedProblem {
    pub fn new(a: DenseMatrix, y: Vec<f64>, w: Vec<f64>, tau: f64) -> Result<Self> {
        if y.len() != a.rows() {
            return Err(Error::contract(format!(
                "measurement length {} does not match {} matrix rows",
                y.len(),
                a.rows()
            )));
        }
        if w.len() != a.cols() {
            return Err(Error::contract(format!(
                "weight length {} does not match {} matrix columns",
                w.len(),
                a.cols()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("measurements must be finite".into()));
        }
        if w.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput("weights must be positive and finite".into()));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidInput(format!("tau must be positive, got {tau}")));
        }
        Ok(WeightedProblem { a, y, w, tau })
    }

    /// The unweighted problem: `w_i = τ` for every index.
    pub fn uniform(a: DenseMatrix, y: Vec<f64>, tau: f64) -> Result<Self> {
        let n = a.cols();
        Self::new(a, y, vec![tau; n], tau)
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    /// Same data, different weights.
    pub fn with_weights(&self, w: Vec<f64>) -> Result<Self> {
        Self::new(self.a.clone(), self.y.clone(), w, self.tau)
    }

    /// `‖Aᵀy‖∞`, the level above which zero is the solution for unit weights.
    pub fn correlation_scale(&self) -> f64 {
        correlation_scale(&self.a, &self.y)
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        objective(&self.a, &self.y, &self.w, x)
    }

    pub fn kkt_residual(&self, x: &[f64]) -> f64 {
        kkt_residual(&self.a, &self.y, &self.w, x)
    }
}

pub fn correlation_scale(a: &DenseMatrix, y: &[f64]) -> f64 {
    norm_inf(&a.matvec_t(y).expect("y length checked by caller"))
}

/// `Σ w_i|x_i| + ½‖Ax − y‖²`.
pub fn objective(a: &DenseMatrix, y: &[f64], w: &[f64], x: &[f64]) -> f64 {
    let ax = a.matvec(x).expect("x length must match columns");
    let fit: f64 = ax.iter().zip(y).map(|(u, v)| (u - v) * (u - v)).sum();
    let reg: f64 = w.iter().zip(x).map(|(wi, xi)| wi * xi.abs()).sum();
    reg + 0.5 * fit
}

/// Largest violation of the weighted optimality conditions at `x`.
///
/// On the support the correlation `a_iᵀ(Ax − y)` must equal `−w_i sign(x_i)`;
/// off the support its magnitude must not exceed `w_i`. Zero means `x` is
/// optimal.
pub fn kkt_residual(a: &DenseMatrix, y: &[f64], w: &[f64], x: &[f64]) -> f64 {
    let ax = a.matvec(x).expect("x length must match columns");
    let r: Vec<f64> = ax.iter().zip(y).map(|(u, v)| u - v).collect();
    let p = a.matvec_t(&r).expect("residual length matches rows");
    kkt_from_correlations(&p, w, x)
}

pub(crate) fn kkt_from_correlations(p: &[f64], w: &[f64], x: &[f64]) -> f64 {
    p.iter()
        .zip(w)
        .zip(x)
        .map(|((&pi, &wi), &xi)| {
            if xi != 0.0 {
                (pi + wi * xi.signum()).abs()
            } else {
                (pi.abs() - wi).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Optimality tolerance, relative to `‖Aᵀy‖∞`.
    pub kkt_tol: f64,
    /// Breakpoint cap; `None` means `20·min(M, N)`.
    pub max_steps: Option<usize>,
    pub factor_mode: FactorMode,
    pub refactor_period: usize,
    /// Additive constant in the reweighting rule `τ / (β|x̂_i| + ε)`.
    pub reweight_epsilon: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            kkt_tol: 1e-8,
            max_steps: None,
            factor_mode: FactorMode::Cholesky,
            refactor_period: DEFAULT_REFACTOR_PERIOD,
            reweight_epsilon: 1.0,
        }
    }
}

impl SolverOptions {
    pub fn step_cap(&self, m: usize, n: usize) -> usize {
        self.max_steps.unwrap_or(20 * m.min(n))
    }
}

/// Bookkeeping returned by every solver.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveReport {
    /// Homotopy steps (breakpoints) or inner iterations, depending on the solver.
    pub steps: usize,
    /// Cost in `AᵀA` applications.
    pub ata: f64,
    /// Optimality residual of the returned iterate under its final weights.
    pub kkt_residual: f64,
    pub support_size: usize,
    pub wall: Duration,
}

/// One solver iteration's output: iterate, the weights it is optimal for,
/// and its cost.
#[derive(Debug, Clone)]
pub struct IterationResult {
    pub x: Vec<f64>,
    pub weights: Vec<f64>,
    pub report: SolveReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// Column `i` of `A` entered the support.
    Add(usize),
    /// Column `i` of `A` left the support.
    Remove(usize),
    /// Column `entering` replaced column `leaving` in a support that could
    /// not grow.
    Exchange { entering: usize, leaving: usize },
    /// The path reached its end point without a support change.
    ReachedTarget,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub kind: StepKind,
    pub step_size: f64,
    /// `∂x`, nonzero only on the support.
    pub direction: Vec<f64>,
    /// `d = AᵀA ∂x`.
    pub rate: Vec<f64>,
}

/// Snapshot handed to path observers after each committed step.
#[derive(Debug)]
pub struct Breakpoint<'a> {
    pub step: usize,
    pub kind: StepKind,
    pub x: &'a [f64],
    /// Weights the iterate is optimal for at this point of the path.
    pub weights: &'a [f64],
    pub support: &'a [usize],
}

pub type Observer<'o> = &'o mut dyn FnMut(&Breakpoint<'_>);

/// The homotopy walker's state.
#[derive(Debug, Clone)]
pub struct ActiveSetState {
    x: Vec<f64>,
    support: Vec<usize>,
    signs: Vec<f64>,
    active: Vec<bool>,
    factor: GramFactor,
    corr: Vec<f64>,
    just_removed: Option<usize>,
}

impl ActiveSetState {
    /// Zero iterate, empty support; computes `p = −Aᵀy` (half a unit).
    pub fn new(op: &mut CountedOperator<'_>, y: &[f64], opts: &SolverOptions) -> Result<Self> {
        let a = op.matrix();
        let mut corr = op.apply_t(y)?;
        corr.iter_mut().for_each(|v| *v = -*v);
        Ok(ActiveSetState {
            x: vec![0.0; a.cols()],
            support: Vec::new(),
            signs: Vec::new(),
            active: vec![false; a.cols()],
            factor: GramFactor::new(opts.factor_mode, a.rows())
                .with_refactor_period(opts.refactor_period),
            corr,
            just_removed: None,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    /// Cached `Aᵀ(Ax − y)`.
    pub fn correlations(&self) -> &[f64] {
        &self.corr
    }

    pub fn factor(&self) -> &GramFactor {
        &self.factor
    }

    /// Index removed by the most recent step, if that step was a removal.
    pub fn just_removed(&self) -> Option<usize> {
        self.just_removed
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.active[i]
    }

    pub(crate) fn add(&mut self, a: &DenseMatrix, index: usize, sign: f64) -> Result<()> {
        debug_assert!(!self.active[index]);
        self.factor.insert(a, index)?;
        self.support.push(index);
        self.signs.push(if sign < 0.0 { -1.0 } else { 1.0 });
        self.active[index] = true;
        Ok(())
    }

    pub(crate) fn remove(&mut self, index: usize) -> Result<()> {
        let pos = self
            .support
            .iter()
            .position(|&j| j == index)
            .ok_or_else(|| Error::contract(format!("index {index} is not in the support")))?;
        self.factor.remove(pos)?;
        self.support.remove(pos);
        self.signs.remove(pos);
        self.active[index] = false;
        self.x[index] = 0.0;
        self.just_removed = Some(index);
        Ok(())
    }

    /// Full-length `∂x` with `∂x_Γ = (A_ΓᵀA_Γ)⁻¹ rhs`.
    pub(crate) fn direction(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let u = self.factor.solve(rhs)?;
        let mut dir = vec![0.0; self.x.len()];
        for (&j, uj) in self.support.iter().zip(u) {
            dir[j] = uj;
        }
        if dir.iter().any(|v| !v.is_finite()) {
            return Err(Error::PathStall {
                step: 0,
                reason: "update direction is not finite".into(),
            });
        }
        Ok(dir)
    }

    /// `d = AᵀA ∂x`: one `AᵀA` application.
    pub(crate) fn rate(&self, op: &mut CountedOperator<'_>, dir: &[f64]) -> Result<Vec<f64>> {
        let vals: Vec<f64> = self.support.iter().map(|&j| dir[j]).collect();
        op.gram_apply_cols(&self.support, &vals)
    }

    /// Moves the iterate and the correlations `delta` along the segment.
    pub(crate) fn advance(&mut self, dir: &[f64], rate: &[f64], delta: f64) {
        for &j in &self.support {
            self.x[j] += delta * dir[j];
        }
        for (p, d) in self.corr.iter_mut().zip(rate) {
            *p += delta * d;
        }
        self.just_removed = None;
    }

    /// Smallest step at which a support entry crosses zero. An entry still
    /// at zero whose direction opposes its sign yields a step of zero.
    pub(crate) fn shrink_step(&self, dir: &[f64]) -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        for (&j, &z) in self.support.iter().zip(&self.signs) {
            if dir[j] == 0.0 {
                continue;
            }
            if self.x[j] == 0.0 {
                if dir[j] * z < 0.0 {
                    return Some((0.0, j));
                }
                continue;
            }
            let ratio = -self.x[j] / dir[j];
            if ratio > 0.0 && best.is_none_or(|(b, _)| ratio < b) {
                best = Some((ratio, j));
            }
        }
        best
    }

    /// Smallest step at which an inactive correlation reaches its moving bound.
    ///
    /// For inactive `i` the constraint along the segment reads
    /// `|p_i + δ d_i| ≤ q_i + δ s_i`; `bound(i)` returns `(q_i, s_i)`.
    pub(crate) fn entry_step(
        &self,
        rate: &[f64],
        bound: impl Fn(usize) -> (f64, f64),
    ) -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        for i in 0..self.x.len() {
            if self.active[i] {
                continue;
            }
            let (q, s) = bound(i);
            let p = self.corr[i];
            let d = rate[i];
            // a just-removed index sits on one face and may only leave through the other
            let resting = self.just_removed == Some(i);
            // upper face: p + δd = q + δs
            let up_rate = d - s;
            if up_rate > 0.0 && !(resting && p >= 0.0) {
                let delta = (q - p).max(0.0) / up_rate;
                if best.is_none_or(|(b, _)| delta < b) {
                    best = Some((delta, i));
                }
            }
            // lower face: p + δd = −(q + δs)
            let lo_rate = -(d + s);
            if lo_rate > 0.0 && !(resting && p < 0.0) {
                let delta = (q + p).max(0.0) / lo_rate;
                if best.is_none_or(|(b, _)| delta < b) {
                    best = Some((delta, i));
                }
            }
        }
        best
    }

    #[cfg(test)]
    pub(crate) fn x_mut(&mut self) -> &mut [f64] {
        &mut self.x
    }

    /// Advances along `outcome` and applies its support change, returning
    /// the change actually made.
    ///
    /// An entering index takes the sign opposite to its correlation.
    pub(crate) fn commit(&mut self, a: &DenseMatrix, outcome: &StepOutcome) -> Result<StepKind> {
        self.advance(&outcome.direction, &outcome.rate, outcome.step_size);
        match outcome.kind {
            StepKind::Add(i) => {
                let sign = -sign_of(self.corr[i]);
                self.enter(a, i, sign)
            }
            StepKind::Remove(j) => self.remove(j).map(|_| StepKind::Remove(j)),
            kind => Ok(kind),
        }
    }

    /// Adds `index`, falling back to an exchange when its column cannot
    /// extend the Gram factor.
    pub(crate) fn enter(&mut self, a: &DenseMatrix, index: usize, sign: f64) -> Result<StepKind> {
        match self.add(a, index, sign) {
            Err(Error::DegenerateGram { .. }) => self.exchange(a, index, sign),
            other => other.map(|_| StepKind::Add(index)),
        }
    }

    /// Brings `entering` in when its column lies in the span of the support.
    ///
    /// With `A_Γ u = a_i`, moving along `v = e_i − u` leaves `Ax` and hence
    /// every correlation unchanged, and at an entry event the objective is
    /// flat along `v`. The move stops where the first support entry reaches
    /// zero; that entry leaves.
    fn exchange(&mut self, a: &DenseMatrix, entering: usize, sign: f64) -> Result<StepKind> {
        let col = a.column(entering);
        let b: Vec<f64> = (0..self.support.len())
            .map(|k| crate::linalg::dot(self.factor.cached_column(k), &col))
            .collect();
        let u = self.factor.solve(&b)?;
        let mut best: Option<(f64, usize)> = None;
        for (k, &j) in self.support.iter().enumerate() {
            let rate = sign * u[k];
            if rate != 0.0 {
                let t = self.x[j] / rate;
                if t >= 0.0 && best.is_none_or(|(b, _)| t < b) {
                    best = Some((t, k));
                }
            }
        }
        let (t, k) = best.ok_or(Error::DegenerateGram { index: entering })?;
        for (kk, &j) in self.support.iter().enumerate() {
            self.x[j] -= t * sign * u[kk];
        }
        let leaving = self.support[k];
        self.remove(leaving)?;
        self.add(a, entering, sign)?;
        self.x[entering] = t * sign;
        self.just_removed = Some(leaving);
        Ok(StepKind::Exchange { entering, leaving })
    }
}

/// Picks the event ending the current segment.
///
/// Within [`TIE_TOL`], reaching the end of the path wins over a removal,
/// which wins over an addition.
pub(crate) fn resolve_step(
    entry: Option<(f64, usize)>,
    shrink: Option<(f64, usize)>,
    remaining: f64,
) -> (StepKind, f64) {
    let close = |a: f64, b: f64| (a - b).abs() <= TIE_TOL * a.abs().max(b.abs()).max(1.0);
    let mut kind = StepKind::ReachedTarget;
    let mut delta = remaining;
    if let Some((ds, j)) = shrink {
        if ds < delta && !close(ds, delta) {
            kind = StepKind::Remove(j);
            delta = ds;
        }
    }
    if let Some((de, i)) = entry {
        if de < delta && !close(de, delta) {
            kind = StepKind::Add(i);
            delta = de;
        }
    }
    (kind, delta)
}

pub(crate) fn check_step(step: usize, delta: f64) -> Result<()> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::PathStall {
            step,
            reason: format!("step size {delta} is not a finite nonnegative number"),
        });
    }
    Ok(())
}

pub(crate) fn sign_of(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}
