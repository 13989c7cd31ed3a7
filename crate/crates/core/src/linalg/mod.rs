//! Dense kernels, cost accounting, and the rank-one-updatable Gram factor.

mod counter;
mod gram;
mod matrix;
pub mod mmio;

pub use counter::{Application, CountedOperator, OpCounter};
pub use gram::{refactorize, FactorMode, GramFactor, DEFAULT_REFACTOR_PERIOD, PIVOT_TOL};
pub use matrix::{axpy, dot, norm1, norm2, norm_inf, DenseMatrix};
