//! Crate-wide error type.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular system ({context}); parameters are likely corrupted")]
    SingularSystem { context: &'static str },

    #[error("unstable timestep: dt = {dt:.3e} s exceeds stability limit {limit:.3e} s")]
    UnstableTimestep { dt: f64, limit: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations; retry with smaller damping")]
    NoConvergence { iterations: usize },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("insufficient trace resolution: virtual nodes {a} and {b} collide on one sample")]
    InsufficientResolution { a: usize, b: usize },

    #[error("trace length mismatch: expected {expected} samples, got {actual}")]
    TraceMismatch { expected: usize, actual: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("degenerate column {column}: no variation over the training rows")]
    DegenerateColumn { column: usize },

    #[error("normal matrix is singular; increase the ridge parameter")]
    SingularNormalMatrix,

    #[error("target variance is zero over the evaluation window")]
    ZeroVarianceTarget,

    #[error("target norm is zero over the evaluation window")]
    ZeroNormTarget,

    #[error("target recurrence diverged at step {index}")]
    DivergentTarget { index: usize },

    #[error("insufficient neighbors at t = {t}: found {found}, need {needed}")]
    InsufficientNeighbors { t: usize, found: usize, needed: usize },

    #[error("too few valid iterations for a spectrum: {valid} < {required}")]
    TooFewValidIterations { valid: usize, required: usize },

    #[error("neighbor covariance is singular even after regularization")]
    SingularCovariance,

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("reservoir patterns {a:04b} and {b:04b} are not separated")]
    NonSeparatedPatterns { a: usize, b: usize },

    #[error("bad IDX magic: expected {expected:#010x}, got {actual:#010x}")]
    BadMagic { expected: u32, actual: u32 },

    #[error("truncated IDX file: expected {expected} data bytes, got {actual}")]
    TruncatedFile { expected: usize, actual: usize },

    #[error("image/label count mismatch: {images} images vs {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
