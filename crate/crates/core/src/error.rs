use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid needs at least 16 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("weight exponent {0} must exceed -1")]
    WeightExponent(f64),
    #[error("non-finite value at node {0}")]
    NonFinite(usize),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("{0}")]
    Regime(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("function vanishes identically")]
    ZeroFunction,
    #[error("invalid exponent ordering: p = {p} exceeds target exponent {q}")]
    ExponentOrdering { p: f64, q: f64 },
    #[error("quotient increases along the descent direction (slope {0:e})")]
    GradientInconsistent(f64),
    #[error("shooting failed: {0}")]
    Shooting(String),
    #[error("matrix is not positive definite at row {0}")]
    NotPositiveDefinite(usize),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
