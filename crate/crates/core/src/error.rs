use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The configuration document does not match the expected schema.
    #[error("schema error: {0}")]
    Schema(String),
    /// A value violates a domain invariant.
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },
    /// An assignment instance is malformed.
    #[error("invalid assignment instance: {0}")]
    Instance(String),
    #[error("unknown {kind} `{value}`")]
    Unknown { kind: &'static str, value: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation { field: field.into(), reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
