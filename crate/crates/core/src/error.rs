use thiserror::Error;

use crate::tree::TreeViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A tree or complete matrix breaks a structural invariant.
    #[error("invalid tree: {0}")]
    Tree(#[from] TreeViolation),
    #[error("invalid argument: {0}")]
    Argument(String),
    /// Malformed or out-of-range input data.
    #[error("format error: {0}")]
    Format(String),
    #[error("size error: {0}")]
    Size(String),
    /// A configured ceiling was exceeded.
    #[error("resource limit: {0}")]
    Resource(String),
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
