use std::path::PathBuf;

use thiserror::Error;

/// Errors of the companion crate, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] cwexit_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Assertion(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed file: {message}")]
    Format { path: PathBuf, message: String },
    #[error("worker failed after {completed} of {requested} trajectories")]
    WorkerFailed { completed: usize, requested: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// 1 for failed assertions, 2 for usage and configuration problems
    /// (including unparsable input files), 3 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Assertion(_) => 1,
            Error::Core(_) | Error::Usage(_) | Error::Format { .. } => 2,
            Error::Io { .. } | Error::WorkerFailed { .. } => 3,
        }
    }
}
