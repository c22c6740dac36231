use thiserror::Error;

/// Errors produced by the tracking library and the experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate model: {0}")]
    DegenerateModel(String),
    #[error("update has zero support")]
    ZeroSupport,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("problem too large for exact enumeration ({tracks} tracks x {measurements} measurements, limit {limit})")]
    TooLargeForEnumeration {
        tracks: usize,
        measurements: usize,
        limit: usize,
    },
    #[error("outcome has zero probability under this occlusion mode")]
    ImpossibleOutcome,
    #[error("separability violated: components {0} and {1} both match the measurement")]
    SeparabilityViolation(usize, usize),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("ratio undefined: {0}")]
    Undefined(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
