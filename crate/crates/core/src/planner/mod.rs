//! Sensing-path planning: gain heatcubes, orienteering extraction, tree search,
//! and the closed tracking loop.

mod exhaustive;
mod heatcube;
mod mcts;
mod optw;
mod tracking;

use thiserror::Error;

use crate::gmm::GmmError;

pub use exhaustive::{exhaustive_optw, MAX_EXHAUSTIVE_NODES};
pub use heatcube::{build_heatcube, GridSpec, Heatcube};
pub use mcts::{mcts_plan, uct, uct_select, MctsConfig, MctsPlan, RootChildStats};
pub use optw::{
    extract_optw, extract_with_fallback, Fallback, OptwInstance, OptwNode, Threshold, ThresholdMode,
};
pub use tracking::{
    belief_hash, gain_cube, replan_loop, Action, ExperimentTrace, PlannerConfig, Scenario,
    TraceRow, TrackerConfig, OCCUPANCY_LEVEL,
};

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("no heatcube cell clears the threshold")]
    EmptyInstance,
    #[error("no node is reachable within its time window")]
    NoFeasibleAction,
    #[error("instance has {nodes} nodes, exhaustive search handles at most {max}")]
    InstanceTooLarge { nodes: usize, max: usize },
    #[error("target has {have} positions, model expects {expected}")]
    TargetLength { have: usize, expected: usize },
    #[error(transparent)]
    Gmm(#[from] GmmError),
}
