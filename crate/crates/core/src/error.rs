use thiserror::Error;

/// Errors produced by graph construction, reduction, and classification.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty graph")]
    EmptyGraph,

    #[error("empty mean")]
    EmptyMean,

    #[error("resistance undefined on disconnected graph")]
    Disconnected,

    #[error("target not a reduction: target {target} >= current {current}")]
    TargetNotReduction { target: usize, current: usize },

    #[error("cut target {target} out of range for {leaves} leaves")]
    CutOutOfRange { target: usize, leaves: usize },

    #[error("degenerate labels: training requires at least two classes")]
    DegenerateLabels,

    #[error("feature dimension mismatch: model expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cross-validation fold count {k} exceeds sample count {n}")]
    BadFoldCount { k: usize, n: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("invalid graph document: {0}")]
    InvalidDocument(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
