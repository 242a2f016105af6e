use thiserror::Error;

/// Errors produced anywhere in the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("placement mismatch: {0}")]
    PlacementMismatch(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("linear solver breakdown: {0}")]
    SolverBreakdown(String),

    #[error("solver tolerance not reached: residual {residual:e} > tol {tol:e}")]
    ToleranceNotReached { residual: f64, tol: f64 },

    #[error("CFL violation: dt * max|u| / h = {cfl:.4} exceeds limit {limit:.4}")]
    CflViolation { cfl: f64, limit: f64 },

    #[error("non-finite value in {field} at index {index} (t = {t})")]
    NonFinite { field: String, index: usize, t: f64 },

    #[error("unknown recipe `{0}`")]
    UnknownRecipe(String),

    #[error("trajectory error: {0}")]
    Trajectory(String),

    #[error("config error (line {line}): {msg}")]
    Config { line: usize, msg: String },

    #[error("snapshot magic mismatch")]
    SnapshotMagic,

    #[error("snapshot checksum mismatch: stored {stored:016x}, computed {computed:016x}")]
    SnapshotChecksum { stored: u64, computed: u64 },

    #[error("snapshot truncated: expected {expected} bytes, found {found}")]
    SnapshotTruncated { expected: usize, found: usize },

    #[error("snapshot header malformed: {0}")]
    SnapshotHeader(String),

    #[error("experiment failed: {0}")]
    Experiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
