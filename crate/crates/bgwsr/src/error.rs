//! Crate-wide error type.

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two dataset rows share the same coordinates.
    #[error("duplicate locations at rows {first} and {second}")]
    DuplicateLocations { first: usize, second: usize },

    /// A matrix that must be positive definite failed to factor, even after
    /// the jitter retries.
    #[error("matrix not positive definite (pivot {pivot} failed after {attempts} jitter attempts)")]
    NotPositiveDefinite { pivot: usize, attempts: usize },

    /// A local weighted least-squares problem was rank deficient.
    #[error("singular local fit at site {site}")]
    SingularFit { site: String },

    /// Every candidate bandwidth failed during cross validation.
    #[error("bandwidth selection failed: {0}")]
    SelectionFailure(String),

    /// Synthetic data generation could not satisfy the requested design.
    #[error("scenario generation failed: {0}")]
    GenerationFailure(String),

    /// A prediction site has zero weight to every observed site.
    #[error("isolated prediction site {site}: all weights are zero")]
    IsolatedSite { site: usize },

    /// An MCMC chain aborted mid-run.
    #[error("chain aborted at iteration {iteration} during {step}: {source}")]
    ChainAborted {
        iteration: usize,
        step: &'static str,
        #[source]
        source: Box<Error>,
    },

    /// A file could not be parsed into the expected schema.
    #[error("{path}:{row}: {message}")]
    Parse {
        path: String,
        row: usize,
        message: String,
    },

    /// A file is missing required columns or rows.
    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by malformed or inconsistent input data.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::DuplicateLocations { .. }
                | Error::GenerationFailure(_)
                | Error::Parse { .. }
                | Error::Schema { .. }
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
