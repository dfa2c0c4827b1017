//! Trajectories: fixed-length resampling, CSV ingestion, signature classes,
//! synthetic generation, and train/test splitting.

mod dataset;
mod io;
mod split;
mod synth;

use nalgebra::{DVector, Point2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::{Environment, HWord, TopologyError};

pub use dataset::{cluster_by_signature, Dataset};
pub use io::{load_csv, read_trajectories, save_csv, write_trajectories, BoundaryMode, DatasetManifest};
pub use split::split;
pub use synth::{synthesize_dataset, GpSampler, SynthParams, MAX_REJECTIONS};

/// Number of timesteps every canonical trajectory carries.
pub const CANONICAL_LEN: usize = 100;

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("trajectory {0:?} has zero duration")]
    DegenerateTrajectory(String),
    #[error("trajectory {id:?} needs at least {need} points, has {have}")]
    TooShort { id: String, have: usize, need: usize },
    #[error("line {line}: {message}")]
    ParseError { line: u64, message: String },
    #[error("trajectory {0:?} does not start and end near the domain boundary")]
    BoundaryViolation(String),
    #[error("template {template:?}: {rejections} consecutive samples rejected")]
    RejectionBudgetExceeded { template: String, rejections: usize },
    #[error("class {class} has {have} members, {need} required")]
    InsufficientClassMembers { class: HWord, have: usize, need: usize },
    #[error("trajectory {id:?} has {have} points, expected {expected}")]
    LengthMismatch { id: String, have: usize, expected: usize },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// A timestamped 2D path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub id: String,
    pub positions: Vec<Point2<f64>>,
    pub timestamps: Vec<f64>,
}

impl Trajectory {
    pub fn new(id: impl Into<String>, positions: Vec<Point2<f64>>, timestamps: Vec<f64>) -> Self {
        assert_eq!(positions.len(), timestamps.len(), "one timestamp per position");
        Self {
            id: id.into(),
            positions,
            timestamps,
        }
    }

    /// Positions at timestamps `0, 1, 2, ...`.
    pub fn from_positions(id: impl Into<String>, positions: Vec<Point2<f64>>) -> Self {
        let timestamps = (0..positions.len()).map(|i| i as f64).collect();
        Self::new(id, positions, timestamps)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Layout `[x_0, y_0, x_1, y_1, ...]`.
    pub fn flatten(&self) -> DVector<f64> {
        DVector::from_iterator(
            2 * self.len(),
            self.positions.iter().flat_map(|p| [p.x, p.y]),
        )
    }

    /// Inverse of [`Trajectory::flatten`], with unit timestamps.
    pub fn from_flat(id: impl Into<String>, flat: &DVector<f64>) -> Self {
        let positions = (0..flat.len() / 2)
            .map(|t| Point2::new(flat[2 * t], flat[2 * t + 1]))
            .collect();
        Self::from_positions(id, positions)
    }

    /// Mean speed over the path (m per time unit).
    pub fn mean_speed(&self) -> f64 {
        let duration = self.timestamps.last().unwrap_or(&0.0) - self.timestamps.first().unwrap_or(&0.0);
        if duration <= 0.0 {
            return 0.0;
        }
        let length: f64 = self.positions.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        length / duration
    }

    /// Start and end both within the boundary tolerance.
    pub fn check_boundary(&self, env: &Environment) -> Result<(), TrajectoryError> {
        match (self.positions.first(), self.positions.last()) {
            (Some(a), Some(b)) if env.is_near_boundary(a) && env.is_near_boundary(b) => Ok(()),
            _ => Err(TrajectoryError::BoundaryViolation(self.id.clone())),
        }
    }
}

/// Resamples to `t_len` points uniformly spaced in time, by linear interpolation.
pub fn canonicalize(traj: &Trajectory, t_len: usize) -> Result<Trajectory, TrajectoryError> {
    if traj.len() < 2 || t_len < 2 {
        return Err(TrajectoryError::TooShort {
            id: traj.id.clone(),
            have: traj.len().min(t_len),
            need: 2,
        });
    }
    let times = &traj.timestamps;
    let t0 = times[0];
    let t_end = times[times.len() - 1];
    let duration = t_end - t0;
    if !(duration > 0.0) {
        return Err(TrajectoryError::DegenerateTrajectory(traj.id.clone()));
    }
    let last = t_len - 1;
    let mut positions = Vec::with_capacity(t_len);
    let mut timestamps = Vec::with_capacity(t_len);
    for k in 0..t_len {
        let tau = if k == last {
            t_end
        } else {
            t0 + duration * (k as f64 / last as f64)
        };
        let i = times.partition_point(|&s| s <= tau).saturating_sub(1);
        let p = if i + 1 >= times.len() {
            traj.positions[times.len() - 1]
        } else {
            let frac = (tau - times[i]) / (times[i + 1] - times[i]);
            let a = traj.positions[i];
            a + (traj.positions[i + 1] - a) * frac
        };
        positions.push(p);
        timestamps.push(tau);
    }
    Ok(Trajectory {
        id: traj.id.clone(),
        positions,
        timestamps,
    })
}
