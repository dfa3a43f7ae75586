use thiserror::Error;

/// Errors raised across the solver pipeline.
#[derive(Debug, Error)]
pub enum UflError {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("simplex did not converge within {iterations} iterations")]
    Solver { iterations: usize },

    #[error("internal consistency violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl UflError {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        UflError::Input(msg.into())
    }

    /// True for errors caused by the caller's data rather than the solver.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            UflError::Input(_) | UflError::DimensionMismatch { .. } | UflError::Parse { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, UflError>;
