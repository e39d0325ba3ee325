//! Crate-wide error type.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A distribution parameter is outside its admissible domain.
    #[error("parameter domain: {0}")]
    Domain(String),

    /// Dimension mismatch between inputs.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Invalid group hierarchy or group-spec file.
    #[error("validation: {0}")]
    Validation(String),

    /// A matrix factorization failed; the message identifies the state.
    #[error("conditioning failure: {0}")]
    Conditioning(String),

    /// CSV parse failure with a 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Invalid feature-expansion recipe.
    #[error("recipe error: {0}")]
    Recipe(String),

    /// Data ingestion problem (zero-variance column, empty file, ...).
    #[error("ingestion error: {0}")]
    Ingestion(String),

    /// Inconsistent run configuration or misuse of an operation.
    #[error("usage error: {0}")]
    Usage(String),

    /// A candidate model is inadmissible under the requested criterion.
    #[error("inadmissible candidate: {0}")]
    Inadmissible(String),

    /// No admissible candidate was left to select from.
    #[error("selection error: {0}")]
    Selection(String),

    /// Malformed draws container or sidecar.
    #[error("store error: {0}")]
    Store(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for the CLI: 2 usage, 3 data/validation, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Shape(_)
            | Error::Validation(_)
            | Error::Parse { .. }
            | Error::Recipe(_)
            | Error::Ingestion(_)
            | Error::Store(_)
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => 3,
            Error::Domain(_)
            | Error::Conditioning(_)
            | Error::Inadmissible(_)
            | Error::Selection(_) => 4,
        }
    }
}
