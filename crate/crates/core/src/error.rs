use thiserror::Error;

use crate::optimize::OptimizationResult;
use crate::readout::Peak;

/// Errors raised by the library. Warnings and soft flags (Nyquist violations,
/// degenerate ground states, inconsistent FFT estimates) are carried on the
/// returned values instead.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A value failed an invariant check (normalization, dimensions).
    #[error("validation error: {0}")]
    Validation(String),

    /// A numerical routine broke one of its own consistency guarantees.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The requested computation exceeds a hard resource cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// The optimizer hit its iteration cap; `best` is the best point found.
    #[error("optimizer did not converge after {iterations} iterations (best objective {})", best.objective)]
    NotConverged {
        iterations: usize,
        best: Box<OptimizationResult>,
    },

    /// The spectral estimator could not assign peaks to parameters.
    #[error("estimation failed: {reason}")]
    Estimation { reason: String, peaks: Vec<Peak> },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

pub(crate) fn numerical(msg: impl Into<String>) -> Error {
    Error::Numerical(msg.into())
}
