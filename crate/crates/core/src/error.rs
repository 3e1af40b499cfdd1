use std::path::PathBuf;

use crate::partition::SubspaceId;

/// Errors produced by `pairnet-core`.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate interval [{lo}, {hi}] in dimension {dim}")]
    DegenerateInterval { dim: usize, lo: f64, hi: f64 },

    #[error("could not draw {count} intervals in dimension {dim} with the minimum width after {attempts} attempts")]
    InfeasiblePartition { dim: usize, count: usize, attempts: usize },

    #[error("linear system is singular: ridge escalation reached {ridge:e} without a positive definite factorization")]
    Singular { ridge: f64 },

    #[error("subspace has {rows} rows but at least {required} are required")]
    InsufficientData { rows: usize, required: usize },

    #[error("subspace {id}: {source}")]
    Subspace {
        id: SubspaceId,
        #[source]
        source: Box<Error>,
    },

    #[error("non-positive input {value} to benchmark {function}")]
    NonPositiveInput { function: &'static str, value: f64 },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("unsupported model file: {0}")]
    Version(String),

    #[error("invalid model file: field `{field}`: {message}")]
    Invariant { field: String, message: String },

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_subspace(self, id: SubspaceId) -> Self {
        Error::Subspace {
            id,
            source: Box::new(self),
        }
    }
}
