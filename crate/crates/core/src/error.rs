//! Error types shared by the model, the switching engine and the CLI.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("point lies on the local stable manifold (y = 0); flight time is infinite")]
    StableManifoldInput,
    #[error("point is outside the isolating block: {0}")]
    OutOfBlock(String),
    #[error("trajectory reached the non-transverse corner set at y = {0:e}")]
    NonTransverse(f64),
    #[error("image left the wall chart (|y| = {0:e} > 1)")]
    LeftNeighbourhood(f64),
    #[error("cap radius {r:e} exceeds the flow-box validity radius {r_max:e}")]
    OutsideFlowBox { r: f64, r_max: f64 },
    #[error("precision exhausted after {found} of {wanted} levels")]
    PrecisionExhausted { found: usize, wanted: usize },
    #[error("invalid segment: {0}")]
    InvalidSegment(String),
    #[error("invalid neighbourhoods: {0}")]
    InvalidNeighbourhoods(String),
    #[error("invalid rectangle: {0}")]
    InvalidRectangle(String),
    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
