use thiserror::Error;

/// Errors produced by graph construction, inference, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A score vector, matrix, or parameter had the wrong length.
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// Empty input where at least one element is required.
    #[error("{0} must be non-empty")]
    Empty(&'static str),

    /// A score or parameter was NaN or infinite.
    #[error("{0} must be finite")]
    NonFinite(&'static str),

    /// A factor definition violated its structural invariants.
    #[error("invalid factor: {0}")]
    InvalidFactor(String),

    /// A factor graph violated its structural invariants.
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    /// A parameter was outside its documented range.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Exhaustive enumeration was requested beyond its size guard.
    #[error("{what} supports at most {limit} variables, got {got}")]
    TooLarge {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    /// An iterative solver exceeded its iteration cap without reaching tolerance.
    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    /// Training diverged (non-finite loss).
    #[error("training aborted: {0}")]
    Training(String),

    /// A file could not be read or parsed; the detail keeps the JSON
    /// parser's line/column context.
    #[error("{path}: {detail}")]
    File { path: String, detail: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
