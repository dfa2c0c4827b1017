//! Workspace topology: obstacles, rays, crossing words, and their reduction.

mod environment;
mod signature;
mod winding;

use thiserror::Error;

pub use environment::{cross, point_segment_distance, segments_intersect, Bounds, Environment, Obstacle};
pub use signature::{
    build_rays, h_signature, is_compatible, partial_h_signature, reduce, segment_crossings, HWord,
    Ray,
};
pub use winding::{quotient_closure, winding_number, winding_oracle, WINDING_EPS};

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),
    #[error("cannot build ray {letter}: {reason}")]
    ConstructionFailed { letter: i32, reason: String },
    #[error("path passes too close to the winding center")]
    UndefinedWinding,
    #[error("every boundary closure passes a ray endpoint")]
    NoClosure,
    #[error("no obstacle with index {0}")]
    UnknownObstacle(usize),
    #[error("reading environment: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing environment: {0}")]
    Json(#[from] serde_json::Error),
}
