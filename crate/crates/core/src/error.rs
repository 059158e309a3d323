use std::fmt;

/// Errors produced by grid construction, kernels, and solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A precondition on an argument was violated.
    InvalidArgument(String),
    /// The grid box is too small to hold the requested object.
    DomainTooSmall(String),
    /// A kernel or rescaling is not resolvable at the grid spacing.
    Resolution(String),
    /// The fixed-point iteration did not reach the tolerance.
    ConvergenceFailure { iterations: usize, residual: f64 },
    /// A direct solve or invariant check broke down numerically.
    NumericalFailure(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::DomainTooSmall(msg) => write!(f, "domain too small: {msg}"),
            Error::Resolution(msg) => write!(f, "resolution error: {msg}"),
            Error::ConvergenceFailure {
                iterations,
                residual,
            } => write!(
                f,
                "no convergence after {iterations} iterations (last residual {residual:e})"
            ),
            Error::NumericalFailure(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
