use thiserror::Error;

/// Errors shared across the library.
///
/// Domain errors name the violated constraint; numerical non-convergence is
/// normally carried inside [`crate::quadrature::IntegralResult`] and only
/// becomes an `Error` where no partial result makes sense.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
