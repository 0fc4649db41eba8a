use thiserror::Error;

/// Errors produced by gazekit operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: timestamp {t} is not strictly after the previous timestamp {prev}")]
    Ordering { line: u64, t: f64, prev: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("degenerate trace: {0}")]
    DegenerateTrace(String),

    #[error("degenerate target: ground-truth map sums to zero after clamping")]
    DegenerateTarget,

    #[error("degenerate distribution: map sums to zero after clamping")]
    DegenerateDistribution,

    #[error("degenerate variance: map has zero variance")]
    DegenerateVariance,

    #[error("empty density: no fixations to normalize")]
    EmptyDensity,

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("quota of {quota} exceeds the {available} distinct participants (short by {})", quota - available)]
    Quota { quota: usize, available: usize },

    #[error("trial {trial_id} references missing source trial {source_id}")]
    DanglingReference { trial_id: String, source_id: String },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
