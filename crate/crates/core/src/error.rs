use std::path::PathBuf;

use thiserror::Error;

use crate::knowledge::CategoryId;

/// Errors produced by the knowledge core, the feature pipeline and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("arity mismatch for feature `{feature}`: expected {expected}, got {actual}")]
    ArityMismatch {
        feature: String,
        expected: usize,
        actual: usize,
    },

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("missing feature `{0}`")]
    MissingFeature(String),

    #[error("unknown category {0}")]
    UnknownCategory(CategoryId),

    #[error("unknown action `{0}`")]
    UnknownAction(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("interaction conflict: {0}")]
    Conflict(String),

    #[error("test already complete")]
    TestComplete,

    #[error("malformed document at {location}: {message}")]
    Document { location: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn document(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Document {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Document {
            location: format!("line {}, column {}", err.line(), err.column()),
            message: err.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
