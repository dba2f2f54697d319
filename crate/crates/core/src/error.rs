use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("applicability error: {0}")]
    Applicability(String),
    #[error("axiom error: {0}")]
    Axiom(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("Picard iteration did not converge after {iterations} steps (last update {last_update:e})")]
    Convergence {
        iterations: usize,
        last_update: f64,
        history: Vec<f64>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

pub(crate) fn applicability(msg: impl Into<String>) -> Error {
    Error::Applicability(msg.into())
}

pub(crate) fn require_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(param(format!("{name} must be finite and > 0, got {v}")))
    }
}

pub(crate) fn require_nonnegative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(param(format!("{name} must be finite and >= 0, got {v}")))
    }
}
