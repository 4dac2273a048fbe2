use thiserror::Error;

/// Errors raised by the library. The CLI maps each variant onto an exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Text input (a coding, a scalar) could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// An enumeration would exceed the configured node or interval budget.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// The working precision is too small to certify the requested result.
    #[error("precision exhausted: {0}")]
    Precision(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
