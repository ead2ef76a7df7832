use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("cannot decode {path}: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("cannot encode {path}: {reason}")]
    Encode { path: PathBuf, reason: String },

    #[error(transparent)]
    Predictor(#[from] PredictorError),

    #[error("{cell}: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<Error>,
    },
}

/// Failures of an external predictor session.
#[derive(Debug, Error)]
pub enum PredictorError {
    #[error("failed to spawn predictor `{program}`: {source}")]
    Spawn {
        program: String,
        #[source]
        source: io::Error,
    },

    #[error("handshake failed: {0}")]
    Handshake(String),

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("timed out after {seconds:.1} s waiting for response to request {id}")]
    Timeout { id: u64, seconds: f64 },

    #[error("predictor stopped mid-stream ({reason}); last good id: {}", fmt_last(*.last_good))]
    Partial {
        last_good: Option<u64>,
        reason: String,
    },

    #[error("expected {expected} predictions, got {got}")]
    Reconciliation { expected: usize, got: usize },

    #[error("predictor I/O failure: {0}")]
    Io(#[from] io::Error),
}

fn fmt_last(id: Option<u64>) -> String {
    id.map_or_else(|| "none".to_string(), |id| id.to_string())
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn in_cell(self, cell: impl Into<String>) -> Self {
        Error::Cell {
            cell: cell.into(),
            source: Box::new(self),
        }
    }

    /// Process exit code for the CLI: 1 validation, 2 predictor, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) => 1,
            Error::Predictor(_) => 2,
            Error::Decode { .. } | Error::Io { .. } | Error::Encode { .. } => 3,
            Error::Cell { source, .. } => source.exit_code(),
        }
    }
}
