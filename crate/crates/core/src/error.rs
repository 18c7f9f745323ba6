use thiserror::Error;

/// Errors produced by the geometric and analytic routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate point set: affine rank {rank} < dimension {dim}")]
    Degenerate { rank: usize, dim: usize },

    #[error("empty region: no point satisfies all constraints")]
    Empty,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty grid")]
    EmptyGrid,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("function is not convex: {0}")]
    NotConvex(String),

    #[error("inconsistent halfspace description: {0}")]
    InconsistentHalfspaces(String),

    #[error("piecewise conversion mismatch: max deviation {deviation:e} at {point:?}")]
    ConversionMismatch { deviation: f64, point: Vec<f64> },

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("two computation routes disagree: {0}")]
    RouteMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
