//! Shared error type for the pricing library.

use thiserror::Error;

/// Errors produced by pricers, simulators and the CMS assembly.
#[derive(Debug, Clone, Error)]
pub enum PricingError {
    /// An input failed validation (out of domain, non-finite, inconsistent).
    #[error("invalid input: {message}")]
    InvalidInput { message: String },

    /// A computation produced a non-finite or otherwise unusable result.
    #[error("numerical failure: {message}")]
    Numerical { message: String },

    /// A Monte Carlo path blew up; carries the first offending path and step.
    #[error("Monte Carlo path failure at path {path}, step {step}: {message}")]
    McPathFailure {
        path: usize,
        step: usize,
        message: String,
    },
}

impl PricingError {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        PricingError::InvalidInput {
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, PricingError>;

/// Validate that `value` is finite, returning an `InvalidInput` naming `field`.
pub(crate) fn require_finite(value: f64, field: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(PricingError::invalid(format!(
            "{field} must be finite, got {value}"
        )))
    }
}

/// Validate `value > 0` (and finite).
pub(crate) fn require_positive(value: f64, field: &str) -> Result<f64> {
    require_finite(value, field)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(PricingError::invalid(format!(
            "{field} must be positive, got {value}"
        )))
    }
}

/// Validate `value >= 0` (and finite).
pub(crate) fn require_non_negative(value: f64, field: &str) -> Result<f64> {
    require_finite(value, field)?;
    if value >= 0.0 {
        Ok(value)
    } else {
        Err(PricingError::invalid(format!(
            "{field} must be non-negative, got {value}"
        )))
    }
}
