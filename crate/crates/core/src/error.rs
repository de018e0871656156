use thiserror::Error;

/// Errors produced while building, fitting, tuning or persisting Kriging models.
#[derive(Debug, Error)]
pub enum TrkError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("points {first} and {second} coincide after normalization")]
    DuplicatePoints { first: usize, second: usize },

    #[error("regression basis needs {terms} terms but only {points} points are available")]
    UnderdeterminedBasis { terms: usize, points: usize },

    #[error("correlation matrix is not positive definite even with nugget {nugget:e}")]
    IllConditionedCorrelation { nugget: f64 },

    #[error("generalized least squares system is rank deficient (rcond {rcond:e})")]
    SingularRegression { rcond: f64 },

    #[error("fit failed: {0}")]
    FitFailed(String),

    #[error("tuning failed: every candidate was infeasible")]
    TuningFailed,

    #[error("singular configuration: {0}")]
    SingularConfiguration(String),

    #[error("model document version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u64, expected: u64 },

    #[error("malformed document: {0}")]
    Deserialization(String),

    #[error("unknown benchmark `{0}`")]
    UnknownBenchmark(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = TrkError> = std::result::Result<T, E>;
