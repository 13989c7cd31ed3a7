//! Cost accounting in units of `AᵀA` applications.
//!
//! One application of `A` or of `Aᵀ` is half a unit, so a product with `A`
//! followed by one with `Aᵀ` costs exactly one. A homotopy step performs one
//! such pair and therefore costs one unit as well. The tally is kept in half
//! units so it stays an exact integer.

use super::matrix::DenseMatrix;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Application {
    A,
    At,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounter {
    halves: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count_application(&mut self, which: Application) {
        match which {
            Application::A | Application::At => self.halves += 1,
        }
    }

    /// Registers whole `AᵀA` units, e.g. homotopy steps tallied after the fact.
    pub fn register_steps(&mut self, steps: u64) {
        self.halves += 2 * steps;
    }

    /// Tally in `AᵀA` units (may end in `.5`).
    pub fn ata(&self) -> f64 {
        self.halves as f64 / 2.0
    }

    pub fn halves(&self) -> u64 {
        self.halves
    }
}

/// A matrix whose every product is routed through an [`OpCounter`].
#[derive(Debug)]
pub struct CountedOperator<'a> {
    a: &'a DenseMatrix,
    counter: OpCounter,
}

impl<'a> CountedOperator<'a> {
    pub fn new(a: &'a DenseMatrix) -> Self {
        CountedOperator {
            a,
            counter: OpCounter::new(),
        }
    }

    pub fn matrix(&self) -> &'a DenseMatrix {
        self.a
    }

    pub fn counter(&self) -> OpCounter {
        self.counter
    }

    pub fn apply(&mut self, v: &[f64]) -> Result<Vec<f64>> {
        self.counter.count_application(Application::A);
        self.a.matvec(v)
    }

    pub fn apply_t(&mut self, v: &[f64]) -> Result<Vec<f64>> {
        self.counter.count_application(Application::At);
        self.a.matvec_t(v)
    }

    /// `A v` for `v` supported on `cols`; counted as a full application.
    pub fn apply_cols(&mut self, cols: &[usize], vals: &[f64]) -> Vec<f64> {
        self.counter.count_application(Application::A);
        self.a.matvec_cols(cols, vals)
    }

    /// `AᵀA v` for `v` supported on `cols`: one unit.
    pub fn gram_apply_cols(&mut self, cols: &[usize], vals: &[f64]) -> Result<Vec<f64>> {
        let av = self.apply_cols(cols, vals);
        self.apply_t(&av)
    }
}
