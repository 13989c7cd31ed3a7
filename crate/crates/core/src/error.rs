use std::path::PathBuf;

use crate::homotopy::SolveReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Iterate and bookkeeping captured when a solver gives up early.
#[derive(Debug, Clone)]
pub struct PartialSolution {
    pub x: Vec<f64>,
    pub weights: Vec<f64>,
    pub report: SolveReport,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller broke an operation's precondition (wrong lengths, bad index, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The extended Gram matrix lost numerical rank when column `index` entered.
    #[error("Gram matrix is numerically singular after adding column {index}")]
    DegenerateGram { index: usize },

    #[error("homotopy path stalled at step {step}: {reason}")]
    PathStall { step: usize, reason: String },

    #[error("iteration cap of {limit} reached before the target was met")]
    MaxSteps {
        limit: usize,
        partial: Box<PartialSolution>,
    },

    /// Reweighting needs a nonzero previous solution.
    #[error("cannot derive weights from an all-zero solution")]
    DegenerateWeights,

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
