//! Metrics and the ensemble runner.

pub mod experiment;
pub mod metrics;

pub use experiment::{
    measurement_count, run_experiment, summarize, write_outputs, write_summary_csv,
    write_trials_csv, ExperimentConfig, IterationRecord, SolverKind, SummaryRow, TrialResult,
    KKT_FLAG,
};
pub use metrics::{ser_db, Stats, SER_CAP_DB};
