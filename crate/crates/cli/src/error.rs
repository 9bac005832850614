use thiserror::Error;

use hermitizer::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    /// Input is well formed but fails a mathematical check.
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("schema error: {0}")]
    Schema(String),

    /// Ill-conditioning, non-convergence or similar.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) | CliError::Schema(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::IllConditioned { .. }
            | CoreError::NoConvergence
            | CoreError::NotDiagonalizable { .. }
            | CoreError::StepTooLarge { .. } => CliError::Numerical(e.to_string()),
            CoreError::InvalidMatrix(_) | CoreError::DimensionMismatch { .. } => {
                CliError::Schema(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            CliError::Io(e.into())
        } else {
            CliError::Schema(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
