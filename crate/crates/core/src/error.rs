use thiserror::Error;

/// Errors raised by field construction, distance estimation and training.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point {0:?} lies outside the field domain")]
    OutsideDomain(Vec<f64>),

    #[error("relabeling is not injective: labels {0} and {1} both map to {2}")]
    NonInjective(i64, i64, i64),

    #[error("label {0} is not in the field's label set")]
    UnknownLabel(i64),

    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("measure-theoretic distance is undefined for point-cloud fields")]
    MeasureOnPointCloud,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("at sample {index}")]
    AtIndex {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown builtin field {name:?}; available: {catalog}")]
    UnknownBuiltin { name: String, catalog: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
