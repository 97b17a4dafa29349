use thiserror::Error;

/// Errors raised by library operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A precondition on the inputs was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A term or size budget ran out before the requested tolerance was met.
    #[error("resource limit: {what} (achieved bound {achieved:e})")]
    Resource { what: String, achieved: f64 },

    /// The moment system could not be matched to the requested tolerance.
    #[error("infeasible: residual {residual:e} exceeds tolerance {tol:e}; {advice}")]
    Infeasible {
        residual: f64,
        tol: f64,
        advice: String,
    },

    /// A numerical invariant that should always hold was broken.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
