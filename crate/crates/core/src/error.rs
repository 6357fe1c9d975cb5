use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical or numerical parameter violates its invariant.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// A coordinate was requested outside the domain an operation is defined on.
    #[error("{what} = {value} lies outside [{min}, {max}]")]
    Domain {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    /// A configuration or study file entry is missing or malformed.
    #[error("`{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The singular value decomposition behind the least-squares training failed.
    #[error("training failed on a {rows}x{cols} system: {reason}")]
    Training {
        rows: usize,
        cols: usize,
        reason: String,
    },

    #[error("singular system of order {order}: zero pivot at row {row}")]
    SingularMatrix { order: usize, row: usize },

    #[error("relative error undefined: reference field has zero norm")]
    UndefinedReference,

    #[error("invalid data: {0}")]
    InvalidData(String),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for failures caused by the numerics rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Training { .. } | Error::SingularMatrix { .. })
    }
}
