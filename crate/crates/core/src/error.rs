use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid subsystem index {index} for {factors} tensor factors")]
    Index { index: usize, factors: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("not a SIC: worst pair ({0}, {1}) deviates from 1/(d+1) by {2:e}", worst.0, worst.1, deviation)]
    NotSic {
        worst: (usize, usize),
        deviation: f64,
    },

    #[error("dimension {0} is not prime")]
    NotPrime(usize),

    #[error("CJ marginal differs from 1/d by {0:e}; map is not trace preserving")]
    NotTracePreserving(f64),

    #[error("two-step assembly matches no index convention (best residual {best:e})")]
    ConventionMismatch {
        best: f64,
        table: Vec<(String, f64)>,
    },

    #[error("fiducial search failed after {restarts} restarts; best residual {best_residual:e}")]
    SearchFailed { restarts: usize, best_residual: f64 },

    #[error("cannot calibrate phase shifter on path {path}: {reason}")]
    Calibration { path: usize, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation failed: {check} (residual {residual:e})")]
    Validation { check: &'static str, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
