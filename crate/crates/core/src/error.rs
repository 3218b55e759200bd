use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration value or document. The key is named.
    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },

    /// Invalid argument to a numerical routine.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Incompatible unit pair passed to a conversion.
    #[error("cannot convert {from} to {to}")]
    Units { from: String, to: String },

    /// Eigensolver or propagator failure.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed CSV/table input; row and column are 1-based.
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(key: &str, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Invalid(_) | Error::Units { .. } | Error::Parse { .. } => 1,
            Error::Numerical(_) => 2,
            Error::Io { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
