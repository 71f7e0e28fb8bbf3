use thiserror::Error;

/// Errors produced by constructions and law checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid: {0}")]
    Invalid(String),

    #[error("unknown cell `{id}` at dimension {dim}")]
    UnknownCell { dim: usize, id: String },

    #[error("truncation mismatch: {0}")]
    TruncMismatch(String),

    #[error("dimension {dim} exceeds truncation {trunc}")]
    DimExceedsTrunc { dim: usize, trunc: usize },

    #[error("incompatible labelling: {0}")]
    Incompatible(String),

    #[error("missing table entry: {0}")]
    MissingEntry(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn incompatible(msg: impl Into<String>) -> Self {
        Error::Incompatible(msg.into())
    }
}
