use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A value fell outside the mathematical domain of an operator.
    #[error("domain error: {0}")]
    Domain(String),
    /// Caller supplied inconsistent or unsupported arguments.
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("integration diverged at step {step}")]
    Diverged { step: usize },
    #[error("reference cache corrupted: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}
