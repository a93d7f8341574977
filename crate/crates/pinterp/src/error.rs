//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial degree {0} is not supported here (need {1})")]
    InvalidDegree(usize, &'static str),

    #[error("family {family} is not available on the {element} element")]
    UnsupportedFamily { family: &'static str, element: &'static str },

    #[error("{op} does not map the source space into the target space (residual {residual:.3e})")]
    IncompatibleSpaces { op: &'static str, residual: f64 },

    #[error("boundary trace is discontinuous at a vertex (mismatch {0:.3e})")]
    DiscontinuousTrace(f64),

    #[error("trace on edge {edge} has degree {got}, space only supports {max}")]
    TraceDegree { edge: usize, got: usize, max: usize },

    #[error("linear solve failed: {0}")]
    SingularSystem(&'static str),

    #[error("generalized eigenvalue solve failed: {0}")]
    EigenFailure(&'static str),

    #[error("fractional order {0} is outside [0, 1]")]
    InvalidFractionalOrder(f64),

    #[error("function does not vanish at the edge endpoints (values {0:.3e}, {1:.3e})")]
    NonVanishingEndpoints(f64, f64),

    #[error("edge circulation of the Whitney remainder is not zero on edge {edge} ({value:.3e})")]
    NonZeroCirculation { edge: usize, value: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("operator {op} cannot be applied to field `{field}`")]
    OperatorFieldMismatch { op: &'static str, field: String },

    #[error("unknown field `{0}`")]
    UnknownField(String),

    #[error("no records to process")]
    EmptyRecords,

    #[error("rate fit needs at least {need} records with p >= {p_min}, got {got}")]
    TooFewRecords { need: usize, got: usize, p_min: usize },

    #[error("errors must be positive for rate fitting (record p={0})")]
    NonPositiveError(usize),

    #[error("bad configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
