use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { offset: usize },

    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },

    #[error("duplicate document id {0:?}")]
    DuplicateDocument(String),

    #[error("{kind} {id} not found")]
    NotFound { kind: &'static str, id: u64 },

    #[error("cannot build an index over an empty passage store")]
    EmptyStore,

    #[error("no embeddings")]
    NoEmbeddings,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("bad file format in {path:?}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("claim exceeds context budget ({claim_tokens} claim tokens, budget {budget})")]
    ClaimExceedsBudget { claim_tokens: usize, budget: usize },

    #[error("krippendorff's alpha is undefined: {0}")]
    UndefinedAlpha(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("transport error for claim {claim_id:?}: {message}")]
    Transport { claim_id: String, message: String },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}
