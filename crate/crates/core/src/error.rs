use thiserror::Error;

/// Errors raised by the construction and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller violated an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// A speed or state fell outside the admissible interval of a flux.
    #[error("value {value} outside admissible interval [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },

    /// The working domain of a flux or system is too narrow for the request.
    #[error("domain error: {0}")]
    Domain(String),

    /// Eigenvalues too close together (or complex) at the given state.
    #[error("strict hyperbolicity violated at {state:?}: {reason}")]
    StrictHyperbolicity { state: Vec<f64>, reason: String },

    /// Wave-curve continuation could not reach the requested parameter.
    #[error("continuation failed at sigma={sigma} (last good {last_good}): {reason}")]
    Continuation {
        sigma: f64,
        last_good: f64,
        reason: String,
    },

    /// A construction step violated one of its structural guarantees.
    #[error("construction error: {0}")]
    Construction(String),

    /// Adjacent states of a profile cannot be joined by the tracked family.
    #[error("structural error: {0}")]
    Structural(String),

    /// A configured resource cap (fronts, events) was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// Sampling resolution too coarse to certify the requested property.
    #[error("resolution error: {0}")]
    Resolution(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
