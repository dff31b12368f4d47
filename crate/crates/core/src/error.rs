use thiserror::Error;

/// Errors across the crate. `InvalidArgument` covers precondition and
/// configuration violations, `NumericalFailure` covers non-finite values and
/// iteration limits; the two map to distinct process exit codes in the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// Eigenvalue too close to zero for a Nystrom extension; only
    /// eigenfunctions with nonzero eigenvalue extend continuously.
    #[error("eigenvalue {index} = {value:e} is at or below the clip tolerance; no continuous extension")]
    DegenerateEigenvalue { index: usize, value: f64 },

    /// The operator fails the positivity hypothesis of fractional powers.
    #[error("operator is not positive: min eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::NumericalFailure(msg.into())
    }
}
