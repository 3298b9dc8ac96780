//! Experiment harness for `magwell`: configuration, the numerical
//! experiments behind the `magwell` binary, and the acceptance criteria.

pub mod compute;
pub mod config;
pub mod criteria;
pub mod experiments;
pub mod output;
pub mod svg;

use thiserror::Error;

pub use config::{ExperimentConfig, ExperimentKind};
pub use criteria::{run_all, CriterionOutcome, Metric};
pub use experiments::run_experiment;
pub use output::{Artifact, Csv};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl BenchError {
    /// Process exit code: 2 for configuration errors, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::Numerical(_) | BenchError::Io(_) => 3,
        }
    }
}

/// Wraps a library error as a numerical failure.
pub(crate) fn numerical<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> BenchError + '_ {
    move |e| BenchError::Numerical(format!("{context}: {e}"))
}
