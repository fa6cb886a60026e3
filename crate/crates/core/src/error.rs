use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum NskError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids ({left} vs {right})")]
    GridMismatch { left: String, right: String },

    #[error("non-finite value in field `{field}` at index {index}")]
    NonFinite { field: String, index: usize },

    #[error("field `{field}` has {got} samples, grid expects {expected}")]
    LengthMismatch {
        field: String,
        got: usize,
        expected: usize,
    },

    #[error("density has negative entries (min = {min:e})")]
    NegativeDensity { min: f64 },

    #[error("density {value:e} at index {index} is below the vacuum floor {floor:e}")]
    VacuumViolation { value: f64, index: usize, floor: f64 },

    #[error("coefficient law {law} is singular at rho = 0 (exponent {exponent})")]
    SingularCoefficient { law: &'static str, exponent: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mollifier radius {r} is not resolved; minimum admissible radius is {min_r}")]
    UnresolvedKernel { r: f64, min_r: f64 },

    #[error("numerical blow-up in stage {stage} (term `{term}`, max |value| = {magnitude:e})")]
    BlowUp {
        stage: usize,
        term: String,
        magnitude: f64,
    },

    #[error("time step {dt:e} exceeds the stability limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, NskError>;
