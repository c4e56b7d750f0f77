use thiserror::Error;

/// Errors shared by every module of the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input: wrong shape, non-finite entries, mismatched dimensions.
    #[error("validation error: {0}")]
    Validation(String),

    /// A stated precondition of an operation does not hold for the given input.
    #[error("domain error: {0}")]
    Domain(String),

    /// The limit configuration cannot measure the supplied element.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// A post-condition that is guaranteed by theory failed. Always a bug.
    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
