use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: line {line}: {message}")]
    Parse {
        context: String,
        line: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("model is not fitted")]
    NotFitted,
    #[error("no known words in document `{0}`")]
    NoKnownWords(String),
    #[error("unknown aspect `{0}`")]
    UnknownAspect(String),
    #[error("undefined similarity: zero vector")]
    ZeroVector,
    #[error("zero variance")]
    ZeroVariance,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            line,
            message: message.into(),
        }
    }
}
