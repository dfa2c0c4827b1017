//! Orienteering instances with time windows, extracted from a thresholded heatcube.

use std::collections::VecDeque;

use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use super::heatcube::Heatcube;
use super::PlannerError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptwNode {
    pub location: Point2<f64>,
    pub t_open: usize,
    pub t_close: usize,
    pub reward: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptwInstance {
    pub nodes: Vec<OptwNode>,
    pub start: Point2<f64>,
    pub start_time: usize,
    /// Robot speed (m/s).
    pub speed: f64,
    /// Duration of one timestep (s).
    pub step: f64,
}

impl OptwInstance {
    /// Timesteps needed to cover `dist`.
    pub fn travel_steps(&self, dist: f64) -> usize {
        let per_step = self.speed * self.step;
        let s = dist / per_step;
        // Guard against 2.0000000001 from rounding of exact multiples.
        let r = s.round();
        if (s - r).abs() < 1e-9 {
            r as usize
        } else {
            s.ceil() as usize
        }
    }

    /// Arrival time at node `j` departing from `from` at `time`, if within its window.
    pub fn arrival(&self, from: &Point2<f64>, time: usize, j: usize) -> Option<usize> {
        let n = &self.nodes[j];
        let arrive = n.t_open.max(time + self.travel_steps((n.location - from).norm()));
        (arrive <= n.t_close).then_some(arrive)
    }

    /// Total reward of a visit order, or `None` if some visit misses its window or repeats.
    pub fn evaluate(&self, order: &[usize]) -> Option<f64> {
        let mut seen = vec![false; self.nodes.len()];
        let mut loc = self.start;
        let mut time = self.start_time;
        let mut total = 0.0;
        for &j in order {
            if j >= self.nodes.len() || seen[j] {
                return None;
            }
            seen[j] = true;
            time = self.arrival(&loc, time, j)?;
            loc = self.nodes[j].location;
            total += self.nodes[j].reward;
        }
        Some(total)
    }
}

/// How cells are selected before grouping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "value")]
pub enum ThresholdMode {
    /// Fraction of the cube maximum.
    Relative(f64),
    /// Nats.
    Absolute(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub mode: ThresholdMode,
    /// Cells below this gain never become nodes.
    pub min_gain: f64,
}

impl Default for Threshold {
    fn default() -> Self {
        Self {
            mode: ThresholdMode::Relative(0.7),
            min_gain: 1e-3,
        }
    }
}

impl Threshold {
    pub fn relative(theta: f64) -> Self {
        Self {
            mode: ThresholdMode::Relative(theta),
            ..Self::default()
        }
    }

    fn halved(&self) -> Self {
        let mode = match self.mode {
            ThresholdMode::Relative(v) => ThresholdMode::Relative(v / 2.0),
            ThresholdMode::Absolute(v) => ThresholdMode::Absolute(v / 2.0),
        };
        Self { mode, ..*self }
    }

    fn cutoff(&self, cube: &Heatcube) -> f64 {
        let level = match self.mode {
            ThresholdMode::Relative(v) => v * cube.max(),
            ThresholdMode::Absolute(v) => v,
        };
        level.max(self.min_gain)
    }
}

/// Groups cells at or above the threshold into 6-connected components
/// (4 spatial neighbours plus the same cell one step earlier and later).
///
/// Each component becomes a node at its gain-weighted centroid, open over the
/// component's time span, rewarding its mean gain.
pub fn extract_optw(cube: &Heatcube, threshold: &Threshold) -> Result<Vec<OptwNode>, PlannerError> {
    let cut = threshold.cutoff(cube);
    let pass: Vec<bool> = cube.values().iter().map(|&v| v > 0.0 && v >= cut).collect();
    let grid = *cube.grid();
    let (nx, ny, nt) = (grid.nx, grid.ny, cube.t_len());
    let mut label = vec![false; pass.len()];
    let mut nodes = Vec::new();
    let mut queue = VecDeque::new();
    for seed in 0..pass.len() {
        if !pass[seed] || label[seed] {
            continue;
        }
        label[seed] = true;
        queue.push_back(seed);
        let (mut wx, mut wy, mut wsum, mut count) = (0.0, 0.0, 0.0, 0usize);
        let (mut t_min, mut t_max) = (usize::MAX, 0);
        while let Some(i) = queue.pop_front() {
            let (ix, iy, it) = cube.coords(i);
            let v = cube.values()[i];
            let p = grid.location(ix, iy);
            wx += v * p.x;
            wy += v * p.y;
            wsum += v;
            count += 1;
            t_min = t_min.min(it);
            t_max = t_max.max(it);
            let mut push = |jx: usize, jy: usize, jt: usize| {
                let j = cube.index(jx, jy, jt);
                if pass[j] && !label[j] {
                    label[j] = true;
                    queue.push_back(j);
                }
            };
            if ix > 0 {
                push(ix - 1, iy, it);
            }
            if ix + 1 < nx {
                push(ix + 1, iy, it);
            }
            if iy > 0 {
                push(ix, iy - 1, it);
            }
            if iy + 1 < ny {
                push(ix, iy + 1, it);
            }
            if it > 0 {
                push(ix, iy, it - 1);
            }
            if it + 1 < nt {
                push(ix, iy, it + 1);
            }
        }
        nodes.push(OptwNode {
            location: Point2::new(wx / wsum, wy / wsum),
            t_open: cube.t_start() + t_min,
            t_close: cube.t_start() + t_max,
            reward: wsum / count as f64,
        });
    }
    if nodes.is_empty() {
        Err(PlannerError::EmptyInstance)
    } else {
        Ok(nodes)
    }
}

/// Which extraction produced the nodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    #[default]
    None,
    HalfThreshold,
    Argmax,
    /// Nothing worth sensing; the robot stays put.
    Idle,
}

/// [`extract_optw`], retrying at half the threshold and then with the single
/// best cell (if it clears `min_gain`).
pub fn extract_with_fallback(cube: &Heatcube, threshold: &Threshold) -> (Vec<OptwNode>, Fallback) {
    if let Ok(n) = extract_optw(cube, threshold) {
        return (n, Fallback::None);
    }
    if let Ok(n) = extract_optw(cube, &threshold.halved()) {
        return (n, Fallback::HalfThreshold);
    }
    match cube.argmax() {
        Some(i) if cube.values()[i] > 0.0 && cube.values()[i] >= threshold.min_gain => {
            let (ix, iy, it) = cube.coords(i);
            let t = cube.t_start() + it;
            (
                vec![OptwNode {
                    location: cube.grid().location(ix, iy),
                    t_open: t,
                    t_close: t,
                    reward: cube.values()[i],
                }],
                Fallback::Argmax,
            )
        }
        _ => (Vec::new(), Fallback::Idle),
    }
}
