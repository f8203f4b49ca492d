use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A profile definition or option failed its well-formedness checks.
    #[error("invalid `{field}`: {reason}")]
    InvalidSpec { field: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    /// The profile lacks the regularity an operation needs (bounded f'').
    #[error("capability error: {0}")]
    Capability(String),

    /// Quadrature did not reach its tolerance. Carries the best estimate.
    #[error("quadrature did not converge: estimate {estimate} with error {error:e}")]
    Accuracy { estimate: f64, error: f64 },

    /// A bound was requested outside its hypothesis.
    #[error("not applicable: {0}")]
    Inapplicable(String),

    #[error("eigenvalue (k={k}, j={j}) not resolved: error estimate {error:e} exceeds {required:e}")]
    NotConverged {
        k: u32,
        j: usize,
        error: f64,
        required: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidSpec {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
