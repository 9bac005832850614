use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (relative residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive definite (minimum eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix is ill-conditioned (condition estimate {estimate:.3e} exceeds {limit:.3e})")]
    IllConditioned { estimate: f64, limit: f64 },

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("matrix is not diagonalizable (eigenvector condition {condition:.3e})")]
    NotDiagonalizable { condition: f64 },

    #[error("node with no steps remaining has no diagonal successor")]
    TerminalNode,

    #[error("{what} = {value} exceeds the supported limit {limit}")]
    LimitExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("integration step {step} too large (stability bound {bound:.3e})")]
    StepTooLarge { step: f64, bound: f64 },

    #[error("potential is singular on the grid: {0}")]
    SingularPotential(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
