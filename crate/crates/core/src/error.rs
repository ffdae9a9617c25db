use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("gcd({a}, {n}) != 1")]
    NotCoprime { a: u64, n: u64 },

    #[error("simulation needs {required} qubits but the cap is {cap}")]
    QubitCapExceeded { required: u32, cap: u32 },

    #[error("cost cap exceeded: {0}")]
    CostCapExceeded(String),

    #[error("inconsistent ground truth: {0}")]
    InconsistentTruth(String),

    #[error("coefficient overflow while building {0}")]
    CoefficientOverflow(&'static str),

    #[error("embedding failed: {0}")]
    EmbeddingFailed(String),

    #[error("invalid embedding: {0} violation(s)")]
    InvalidEmbedding(usize),

    #[error("{what} line {line}: {msg}")]
    Parse {
        what: &'static str,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("connection to sampler failed: {message}")]
    Connection {
        message: String,
        retry_after: Option<Duration>,
    },

    #[error("sampler protocol violation: {0}")]
    Protocol(String),

    #[error("sampler rejected request (status {status}): {message}")]
    Rejected {
        status: u16,
        message: String,
        retry_after: Option<Duration>,
    },

    #[error("scaling fit needs at least 2 nonzero medians, got {0}")]
    InsufficientFitPoints(usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Server-suggested back-off, when the failure carried one.
    pub fn retry_after(&self) -> Option<Duration> {
        match self {
            Error::Connection { retry_after, .. } | Error::Rejected { retry_after, .. } => {
                *retry_after
            }
            _ => None,
        }
    }
}
