use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse item `{id}`: {source}")]
    Parse {
        id: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid item `{id}`: {reason}")]
    Validation { id: String, reason: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot split dataset: {0}")]
    Split(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("inconsistent canonical metadata: {0}")]
    Metadata(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("training diverged at epoch {epoch}, batch {batch}: {reason}")]
    Training {
        epoch: usize,
        batch: usize,
        reason: String,
    },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("design matrix is rank deficient; collinear columns: {columns:?}")]
    Rank { columns: Vec<String> },

    #[error("coordinate descent did not converge after {iterations} iterations (max change {max_change:e})")]
    Convergence { iterations: usize, max_change: f64 },

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error("not found: {0}")]
    Lookup(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(id: &str, reason: impl Into<String>) -> Self {
        Error::Validation {
            id: id.to_string(),
            reason: reason.into(),
        }
    }
}
