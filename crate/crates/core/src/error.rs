//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range or malformed. Carries the
    /// offending field name so front ends can point at it.
    #[error("configuration error: field `{field}`: {message}")]
    Config { field: String, message: String },

    /// An internal consistency check failed (bad gate matrix, index out of
    /// range, norm loss). These indicate a bug, not bad user input.
    #[error("internal error: {0}")]
    Internal(String),

    /// An analysis step received data it cannot work with (vanishing norm,
    /// mismatched tables, grids too coarse).
    #[error("analysis error: {0}")]
    Analysis(String),

    /// File input could not be parsed. Line numbers are 1-based.
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Error::Internal(message.into())
    }

    pub fn analysis(message: impl Into<String>) -> Self {
        Error::Analysis(message.into())
    }

    /// Process exit code for the CLI: 0 success, 2 config, 3 i/o, 4 analysis.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            Error::Io(_) | Error::Parse { .. } => 3,
            Error::Analysis(_) => 4,
            Error::Internal(_) => 4,
        }
    }
}
