use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error in `{param}`: {reason}")]
    Domain { param: &'static str, reason: String },

    /// The magnetic field configuration is not handled by the operation.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// More mass was requested than the supplied levels can hold.
    #[error("capacity exceeded: mass {mass} does not fit into {supplied} levels")]
    Capacity { mass: f64, supplied: usize },

    /// A documented precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A grid does not carry the support of the function placed on it.
    #[error("support violation: {0}")]
    Support(String),

    /// Two independent evaluations of the same quantity disagree.
    #[error("cross-check failed: {0}")]
    CrossCheck(String),

    /// An iterative method stopped before reaching its tolerance.
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(param: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        param,
        reason: reason.into(),
    }
}

/// Rejects NaN and infinities.
pub(crate) fn finite(param: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(domain(param, format!("expected a finite number, got {value}")))
    }
}

pub(crate) fn positive(param: &'static str, value: f64) -> Result<f64> {
    finite(param, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(domain(param, format!("must be > 0, got {value}")))
    }
}

pub(crate) fn non_negative(param: &'static str, value: f64) -> Result<f64> {
    finite(param, value)?;
    if value >= 0.0 {
        Ok(value)
    } else {
        Err(domain(param, format!("must be >= 0, got {value}")))
    }
}
