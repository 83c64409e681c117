use thiserror::Error;

/// Errors raised by the library operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("instance of size {n} exceeds the limit of {max} for {what}")]
    SizeLimit { what: &'static str, n: usize, max: usize },

    #[error("generation failed: {0}")]
    Generation(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
