use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZenoError {
    /// An input violated a precondition (shape, sign, degenerate support, ...).
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A request exceeded a hard resource cap such as the Hilbert-space size.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// A function could not be evaluated, e.g. `ln q` at a point where `q <= 0`.
    #[error("evaluation failed: {0}")]
    Evaluation(String),
    /// The survival probability is exactly one, so the Fisher information diverges.
    #[error("singular Fisher information: {0}")]
    Singularity(String),
}

pub type Result<T> = std::result::Result<T, ZenoError>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(ZenoError::Argument(msg.into()))
}
