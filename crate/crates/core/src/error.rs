use thiserror::Error;

/// Errors raised by the core algorithms.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Input violates a type invariant or an operation precondition.
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("index {index} out of range for size {bound}")]
    IndexOutOfRange { index: usize, bound: usize },
    /// The requested computation exceeds a configured resource bound.
    #[error("resource bound exceeded: {0}")]
    Resource(String),
    /// Malformed serialized data.
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// True for refusals caused by resource bounds rather than bad input.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
