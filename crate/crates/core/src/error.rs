//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MiiError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("embedding dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("vector norm {norm} is not 1 within tolerance")]
    NotUnitNorm { norm: f64 },
    #[error("inputs are antipodal within tolerance; spherical midpoint is undefined")]
    AntipodalInputs,
    #[error("{0} must not be empty")]
    EmptyInput(&'static str),
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),
    #[error("degenerate triangle: area below tolerance")]
    DegenerateTriangle,
    #[error("triangulation undefined: {0}")]
    BadPointSet(&'static str),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("bad file format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, MiiError>;
