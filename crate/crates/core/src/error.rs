use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QwError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("operation requires a {expected} grid")]
    GridKindMismatch { expected: &'static str },
    #[error("slot {slot} out of range (grid has {count} slots)")]
    SlotOutOfRange { slot: usize, count: usize },
    #[error("operation requires a {expected} walk")]
    FamilyMismatch { expected: &'static str },
    #[error("dispersion is degenerate at k = {kappa:?} (sin w = {sin_omega:e})")]
    Degenerate { kappa: [f64; 3], sin_omega: f64 },
    #[error("state is in the {found} domain, expected {expected}")]
    DomainMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("site {0:?} is outside the grid")]
    SiteOutOfGrid(Vec<i64>),
    #[error("invalid coin vector: {0}")]
    InvalidCoin(String),
    #[error("superposition weights are not normalised: |c+|^2 + |c-|^2 = {0}")]
    WeightNormalization(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("axis {axis} is invalid for a {dimension}-dimensional field")]
    BadAxis { axis: usize, dimension: usize },
    #[error("malformed state dump: {0}")]
    InvalidDump(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for QwError {
    fn from(e: std::io::Error) -> Self {
        QwError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, QwError>;
