use thiserror::Error;

/// Errors raised by the numerical layers (special functions, operators, solver, PK/PD).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FracError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A series did not meet its truncation criterion within the term budget.
    #[error("series did not converge after {terms} terms (last term norm {last_term_norm:e}, partial sum norm {partial_sum_norm:e})")]
    Convergence {
        terms: usize,
        partial_sum: Vec<f64>,
        partial_sum_norm: f64,
        last_term_norm: f64,
    },

    /// Quadrature or discretisation could not reach the requested accuracy.
    #[error("accuracy error: {message} (achieved estimate {estimate:e})")]
    Accuracy { message: String, estimate: f64 },

    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },
}

impl FracError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        FracError::Domain(msg.into())
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        FracError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, FracError>;
