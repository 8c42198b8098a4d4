use thiserror::Error;

use crate::statekit::Role;

pub type Result<T> = std::result::Result<T, QrfError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QrfError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("all-zero amplitude vector cannot be normalized")]
    ZeroVectorInput,
    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("role {0:?} appears in both operands")]
    RoleCollision(Role),
    #[error("role {0:?} is not present in the layout")]
    UnknownRole(Role),
    #[error("operator is not unitary")]
    NotUnitary,
    #[error("bad layout: {0}")]
    BadLayout(String),
    #[error("basis mismatch: {left} vs {right}")]
    BasisMismatch { left: String, right: String },
    #[error("cannot split dimension {dim} as {rows} x {cols}")]
    BadBipartition { dim: usize, rows: usize, cols: usize },
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("translation moves {mass:e} of probability into the wrap guard ({stage})")]
    WrapAround { stage: String, mass: f64 },
    #[error("label {label} is not on the grid")]
    OffGridLabel { label: f64 },
    #[error("shift {shift} is not an integer multiple of the spacing")]
    OffGridShift { shift: f64 },
    #[error("matrix of dimension {dim} is too large to materialize densely")]
    TooLarge { dim: usize },
    #[error("invalid config field `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("i/o failure: {0}")]
    IoFailure(String),
}

impl QrfError {
    /// Stable variant name for machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            QrfError::DimensionMismatch { .. } => "DimensionMismatch",
            QrfError::ZeroVectorInput => "ZeroVectorInput",
            QrfError::NotNormalized { .. } => "NotNormalized",
            QrfError::RoleCollision(_) => "RoleCollision",
            QrfError::UnknownRole(_) => "UnknownRole",
            QrfError::NotUnitary => "NotUnitary",
            QrfError::BadLayout(_) => "BadLayout",
            QrfError::BasisMismatch { .. } => "BasisMismatch",
            QrfError::BadBipartition { .. } => "BadBipartition",
            QrfError::BadParameters(_) => "BadParameters",
            QrfError::WrapAround { .. } => "WrapAround",
            QrfError::OffGridLabel { .. } => "OffGridLabel",
            QrfError::OffGridShift { .. } => "OffGridShift",
            QrfError::TooLarge { .. } => "TooLarge",
            QrfError::ConfigInvalid { .. } => "ConfigInvalid",
            QrfError::UnknownSuite(_) => "UnknownSuite",
            QrfError::IoFailure(_) => "IoFailure",
        }
    }
}
