use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("hexagon depth {depth} exceeds truncation depth {limit}")]
    Truncated { depth: usize, limit: usize },
    #[error("point is not on a boundary line")]
    NotOnBoundary,
    #[error("point is not on the requested wall")]
    NotOnWall,
    #[error("points lie in different blocks")]
    DifferentBlocks,
    #[error("block {0} is not explored")]
    Unexplored(String),
    #[error("path is not composable at step {0}")]
    NotComposable(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("spec is reducible: {0}")]
    Reducible(String),
    #[error("solver did not converge after {iterations} iterations (gradient norm {gradient:e})")]
    NoConvergence { iterations: usize, gradient: f64 },
    #[error("wall chain of length {0} is too long for the grid oracle")]
    ChainTooLong(usize),
    #[error("class {0} does not exist")]
    UnknownClass(usize),
    #[error("mismatched covering scales")]
    ScaleMismatch,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
