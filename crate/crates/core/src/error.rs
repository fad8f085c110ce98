use thiserror::Error;

use crate::network::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input document.
    #[error("format error: {0}")]
    Format(String),

    #[error("network violates model constraints: {0}")]
    Validation(ValidationReport),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The self-consistent frequency equation has no acceptable root.
    #[error("no self-consistent root in [{lower}, {upper}] (smallest residual {residual:e})")]
    Convergence { lower: f64, upper: f64, residual: f64 },

    #[error("quadrature did not converge: estimated error {achieved:e} above tolerance {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("overlap {value} exceeds 1 by more than the quadrature tolerance")]
    Overshoot { value: f64 },

    #[error("all {0} evaluations failed")]
    SearchFailed(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Convergence { .. } | Error::Quadrature { .. } | Error::Overshoot { .. } | Error::SearchFailed(_))
    }
}
