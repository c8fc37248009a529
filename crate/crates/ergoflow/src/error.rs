use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate bandwidth: {0}")]
    DegenerateBandwidth(String),

    #[error("invalid kernel parameters: {0}")]
    InvalidKernel(String),

    #[error("flow is not invertible")]
    NonInvertibleFlow,

    #[error("gridded field queried before load")]
    UninitializedField,

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("control out of bounds at step {step}, axis {axis}: {value} outside [{lo}, {hi}]")]
    ControlViolation {
        step: usize,
        axis: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("numeric integrity violation: {0}")]
    NumericIntegrity(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("initialization error: {0}")]
    Init(String),
}

pub type Result<T> = std::result::Result<T, Error>;
