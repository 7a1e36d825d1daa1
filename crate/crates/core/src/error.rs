//! Error type shared by every module of the crate.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the numerical routines and parsers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Arguments violate a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A linear system or node set is singular.
    #[error("singular system: {0}")]
    Singular(String),
    /// Exact polynomial division left a non-negligible remainder.
    #[error("polynomial division is not exact (remainder {remainder:e})")]
    NotDivisible { remainder: f64 },
    /// An iterative method ran out of iterations or subdivisions.
    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },
    /// A function produced NaN or infinity.
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    /// A point lies outside the domain of the object evaluated there.
    #[error("point outside domain: {0}")]
    OutOfDomain(String),
    /// A profile set violates an admissibility inequality.
    #[error("profile set is not admissible: {0}")]
    NotAdmissible(String),
    /// A Hessian that should be positive definite is not.
    #[error("hessian is not positive definite (eigenvalue {eigenvalue:e})")]
    NotConvex { eigenvalue: f64 },
    /// A linear system has no consistent solution.
    #[error("inconsistent system: {0}")]
    Inconsistent(String),
    /// A linear system has more than one solution.
    #[error("underdetermined system: {0}")]
    Underdetermined(String),
    /// Text input failed to parse.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
