use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// The requested computation exceeds a configured resource budget.
    #[error("resource budget exceeded: {0}")]
    Resource(String),
    /// An experiment was configured in a way that cannot produce a result.
    #[error("configuration error: {0}")]
    Config(String),
    /// Input data is unusable, e.g. a test function with zero source norm.
    #[error("data error: {0}")]
    Data(String),
    /// A test function could not be constructed in the requested space.
    #[error("construction error: {0}")]
    Construction(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
