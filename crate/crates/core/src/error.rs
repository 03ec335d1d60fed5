use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("configuration error in `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("truncation: {0}")]
    Truncation(String),

    #[error("operation requires a normalizable state, got a generalized eigenfunction")]
    GeneralizedState,

    #[error("moments undefined: {0}")]
    UndefinedMoments(String),

    #[error("step size too large: dt = {dt}, limit = {limit}")]
    StepSize { dt: f64, limit: f64 },

    #[error("integration method `{method}` not applicable: {reason}")]
    Method { method: &'static str, reason: String },

    #[error("particle never reaches the detector: {0}")]
    NoArrival(String),

    #[error("turning point at x = {x}: radicand {radicand}")]
    TurningPoint { x: f64, radicand: f64 },

    #[error("reduction coordinate not monotone: {0}")]
    Monotonicity(String),

    #[error("margin `{name}` undefined: zero denominator")]
    UndefinedMargin { name: &'static str },

    #[error("unsupported observable: {0}")]
    UnsupportedObservable(String),
}

impl LabError {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        LabError::Config {
            field,
            reason: reason.into(),
        }
    }
}
