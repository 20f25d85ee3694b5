use thiserror::Error;

/// Errors raised anywhere in the survey pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no access points")]
    NoAccessPoints,
    #[error("invalid access point id {0:?}")]
    InvalidApId(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unreachable waypoint {index} at ({x}, {y})")]
    UnreachableWaypoint { index: usize, x: f64, y: f64 },
    #[error("path blocked between waypoints {from} and {to}")]
    PathBlocked { from: usize, to: usize },
    #[error("degenerate grid: spacing {0} exceeds both floorplan dimensions")]
    DegenerateGrid(f64),
    #[error("empty sequence")]
    EmptySequence,
    #[error("timestamps not strictly increasing at index {0}")]
    NonMonotonic(usize),
    #[error("corrupt alignment: {0}")]
    CorruptAlignment(String),
    #[error("AP not in dataset: {0}")]
    UnknownAp(String),
    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("length mismatch: {0} predictions vs {1} truths")]
    LengthMismatch(usize, usize),
    #[error("no shared access points between datasets")]
    NoSharedAps,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("schema error in record {index}: {msg}")]
    Schema { index: usize, msg: String },
    #[error("invalid model file: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by the numbers themselves rather than by
    /// malformed input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NonFinite(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
