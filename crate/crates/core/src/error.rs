use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FracError {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative routine stopped before reaching its tolerance.
    #[error("{method} did not converge after {iterations} iterations (residual {residual:.3e})")]
    IterationFailure {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// Array sizes of two operands do not agree.
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    /// An integral that should be finite does not converge.
    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    /// The tabulated extension profile does not reach far enough.
    #[error("profile truncation: {0}")]
    Truncation(String),

    /// A monotone scheme produced a decreasing iterate.
    #[error("scheme error: iterate decreased by {violation:.3e} at sweep {sweep}")]
    NonMonotone { sweep: usize, violation: f64 },

    /// A dense linear-algebra kernel failed.
    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    /// A result contradicts a property that must hold for consistent input.
    #[error("inconsistency: {0}")]
    Inconsistent(String),

    /// Mountain-pass search did not leave the neighbourhood of the local minimum.
    #[error("mountain-pass failure: {0}")]
    MountainPass(String),

    /// Invalid configuration for a driver routine.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for FracError {
    fn from(e: std::io::Error) -> Self {
        FracError::Io(e.to_string())
    }
}

impl From<csv::Error> for FracError {
    fn from(e: csv::Error) -> Self {
        FracError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FracError>;
