use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of the operation (n = 0, d not dividing n, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A factor of the requested expression is singular at this exponent.
    #[error("singularity: {0}")]
    Singularity(String),

    /// An infinite product or series was requested outside its region of convergence.
    #[error("outside convergence domain: {0}")]
    Convergence(String),

    /// The request is well-formed but beyond what this implementation supports.
    #[error("unsupported: {0}")]
    Capability(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("unknown identity `{0}`")]
    Lookup(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("division by zero in {0}")]
    DivisionByZero(&'static str),

    /// Two code paths that must agree did not. Always a bug.
    #[error("internal consistency error: {0}")]
    Internal(String),
}

impl Error {
    /// True for errors that indicate a broken invariant rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Internal(_) | Error::DivisionByZero(_))
    }
}
