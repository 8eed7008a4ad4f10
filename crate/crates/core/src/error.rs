use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by models, solvers and the benchmark harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A solver, policy, or environment was combined with settings it cannot honour.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid action {action} for model `{model}`: {reason}")]
    InvalidAction {
        model: &'static str,
        action: String,
        reason: String,
    },

    #[error("invalid particle belief: {0}")]
    InvalidBelief(String),

    /// Sparse Sampling-omega refuses to run trees above its node cap.
    #[error("node budget exceeded: {required} nodes required, cap is {cap}")]
    NodeBudget { required: f64, cap: u64 },

    /// An experiment precondition (sample size, support size, ...) does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Every importance weight drawn was zero.
    #[error("degenerate sample: all importance weights are zero")]
    Degenerate,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that the CLI maps to the configuration exit code.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Parse { .. } | Error::InvalidAction { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
