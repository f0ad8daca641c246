use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("input buffer underflow: lag {lag} requested but only {recorded} inputs recorded")]
    BufferUnderflow { lag: usize, recorded: usize },

    #[error("input buffer depth {depth} exceeded by lag {lag}")]
    LagBeyondDepth { lag: usize, depth: usize },

    #[error("numeric consistency violated in {context}: {detail}")]
    NumericConsistency { context: &'static str, detail: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Fails with [`Error::InvalidParameter`] unless `value` is finite and strictly positive.
pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {value}")))
    }
}
