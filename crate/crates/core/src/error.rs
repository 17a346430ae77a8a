use thiserror::Error;

/// Errors raised by the recovery, estimation and bound routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid shape {0:?}: every dimension must be positive")]
    InvalidShape(Vec<usize>),

    #[error("tensor contains non-finite entries")]
    NonFinite,

    #[error("invalid bipartition {modes:?} for a tensor of order {order}")]
    InvalidBipartition { modes: Vec<usize>, order: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("signal has zero norm for atom {0}")]
    DegenerateSignal(String),

    #[error("iterate has zero norm for atom {0}")]
    DegenerateIterate(String),

    #[error("measurement map is degenerate: {0}")]
    DegenerateMap(String),

    #[error("invalid regularizer: {0}")]
    InvalidRegularizer(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bound not applicable: {0}")]
    BoundNotApplicable(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
