//! Closed-loop tracking: replan, move one step, try to sense, update, repeat.

use std::time::Instant;

use nalgebra::{Point2, Vector2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::gain::{GainKind, HomotopicField, MetricField, MetricMode, DEFAULT_KAPPA_R};
use crate::gmm::{
    condition, marginalized_belief, measurement_belief, scale_by_belief, update_detect, update_miss,
    HomotopicGmm, Measurement, MeasurementSet, PartialMode, SensorModel,
};
use crate::topology::{Environment, Ray};
use crate::trajectory::Trajectory;
use crate::vomp::{HomotopicBelief, VompModel};

use super::heatcube::{build_heatcube, GridSpec, Heatcube};
use super::mcts::{mcts_plan, MctsConfig};
use super::optw::{extract_with_fallback, Fallback, OptwInstance, Threshold};
use super::PlannerError;

/// Relative level used for the recorded heatcube occupancy.
pub const OCCUPANCY_LEVEL: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    /// Grid cells per axis.
    pub grid_cells: usize,
    pub threshold: Threshold,
    pub mcts: MctsConfig,
    /// Robot speed (m/s); defaults to `speed_factor` times the mean training speed.
    pub robot_speed: Option<f64>,
    pub speed_factor: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            grid_cells: 30,
            threshold: Threshold::default(),
            mcts: MctsConfig::default(),
            robot_speed: None,
            speed_factor: 1.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerConfig {
    pub sensor: SensorModel,
    pub planner: PlannerConfig,
    /// Range coefficient of the metric gain's noise model.
    pub kappa_r: f64,
    pub metric_mode: MetricMode,
    pub partial_mode: PartialMode,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            sensor: SensorModel::default(),
            planner: PlannerConfig::default(),
            kappa_r: DEFAULT_KAPPA_R,
            metric_mode: MetricMode::default(),
            partial_mode: PartialMode::default(),
        }
    }
}

/// Everything fixed during one tracking experiment.
#[derive(Clone, Copy, Debug)]
pub struct Scenario<'a> {
    pub env: &'a Environment,
    pub rays: &'a [Ray],
    pub prior: &'a HomotopicGmm,
    pub model: &'a VompModel,
    /// Ground truth, one position per timestep.
    pub target: &'a Trajectory,
    /// Robot speed (m/s).
    pub robot_speed: f64,
    /// Duration of one timestep (s).
    pub step_duration: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Action {
    /// The given detection at `t = 0`.
    Initial,
    Idle,
    MoveTo {
        location: Point2<f64>,
        t_open: usize,
        t_close: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    /// Robot position at the end of the step.
    pub robot: Point2<f64>,
    pub action: Action,
    pub attempted: bool,
    pub detected: bool,
    pub measurement: Option<Point2<f64>>,
    pub belief_hash: String,
    pub fallback: Fallback,
    pub nodes: usize,
    pub cube_max: f64,
    /// Fraction of heatcube cells above 1% of the cube maximum.
    pub occupancy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentTrace {
    pub target_id: String,
    pub gain_kind: GainKind,
    pub seed: u64,
    pub rows: Vec<TraceRow>,
    pub measurements: MeasurementSet,
    /// Posterior after each detection, including the one at `t = 0`.
    #[serde(skip)]
    pub snapshots: Vec<(usize, HomotopicGmm)>,
    #[serde(skip)]
    pub final_posterior: HomotopicGmm,
    pub final_belief: HomotopicBelief,
    /// Wall-clock seconds for the whole experiment.
    pub duration_s: f64,
}

impl ExperimentTrace {
    /// Detections after the initial one.
    pub fn measurement_count(&self) -> usize {
        self.rows.iter().filter(|r| r.t > 0 && r.detected).count()
    }

    /// Robot locations of every sensing attempt after `t = 0`.
    pub fn sensing_locations(&self) -> Vec<Point2<f64>> {
        self.rows
            .iter()
            .filter(|r| r.t > 0 && r.attempted)
            .map(|r| r.robot)
            .collect()
    }

    /// The sequence of decisions, for reproducibility checks.
    pub fn decisions(&self) -> Vec<(Action, bool, bool)> {
        self.rows
            .iter()
            .map(|r| (r.action.clone(), r.attempted, r.detected))
            .collect()
    }
}

/// Short stable digest of a belief.
pub fn belief_hash(b: &HomotopicBelief) -> String {
    let mut h = Sha256::new();
    for (w, p) in b.sorted() {
        h.update(w.to_string().as_bytes());
        h.update(p.to_bits().to_le_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

struct State<'a> {
    scenario: Scenario<'a>,
    config: &'a TrackerConfig,
    base: HomotopicGmm,
    measurements: MeasurementSet,
}

impl State<'_> {
    fn belief(&self) -> HomotopicBelief {
        let s = &self.scenario;
        match self.config.partial_mode {
            PartialMode::PosteriorMeans => marginalized_belief(
                &self.base,
                s.rays,
                s.model,
                self.measurements.last_t().unwrap_or(0),
            ),
            PartialMode::RawPolyline => measurement_belief(&self.measurements, s.rays, s.model),
        }
    }

    fn posterior(&self, belief: &HomotopicBelief) -> HomotopicGmm {
        scale_by_belief(&self.base, belief).unwrap_or_else(|_| self.base.clone())
    }
}

/// Heatcube of the chosen gain over timesteps `t..T`.
pub fn gain_cube(
    kind: GainKind,
    posterior: &HomotopicGmm,
    belief: &HomotopicBelief,
    scenario: &Scenario<'_>,
    config: &TrackerConfig,
    t: usize,
) -> Result<Heatcube, PlannerError> {
    let grid = GridSpec::uniform(*scenario.env.bounds(), config.planner.grid_cells);
    let horizon = t..posterior.t_len;
    Ok(match kind {
        GainKind::Homotopic => {
            let field = HomotopicField::new(
                posterior,
                belief,
                scenario.rays,
                scenario.model,
                &config.sensor,
                horizon.clone(),
            )?;
            if field.is_zero() {
                Heatcube::zeros(grid, horizon)
            } else {
                build_heatcube(&field, grid, horizon)
            }
        }
        GainKind::Metric => {
            let field = MetricField::new(
                posterior,
                &config.sensor,
                config.kappa_r,
                config.metric_mode,
                horizon.clone(),
            )?;
            build_heatcube(&field, grid, horizon)
        }
    })
}

fn noise<R: Rng>(rng: &mut R, sigma: f64) -> Vector2<f64> {
    Vector2::new(
        sigma * rng.sample::<f64, _>(StandardNormal),
        sigma * rng.sample::<f64, _>(StandardNormal),
    )
}

/// Runs one tracking experiment against `scenario.target`.
pub fn replan_loop(
    scenario: Scenario<'_>,
    kind: GainKind,
    config: &TrackerConfig,
    seed: u64,
) -> Result<ExperimentTrace, PlannerError> {
    let started = Instant::now();
    let t_len = scenario.prior.t_len;
    let truth = &scenario.target.positions;
    if truth.len() != t_len {
        return Err(PlannerError::TargetLength {
            have: truth.len(),
            expected: t_len,
        });
    }
    let sensor = config.sensor;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let z0 = truth[0] + noise(&mut rng, sensor.sigma_z);
    let first = Measurement { t: 0, z: z0, x: z0 };
    let measurements = MeasurementSet::new(vec![first], sensor.sigma_z)?;
    let base = condition(scenario.prior, &measurements)?;
    let mut state = State {
        scenario,
        config,
        base,
        measurements,
    };
    let mut belief = state.belief();
    let mut posterior = state.posterior(&belief);
    let mut robot = z0;
    let mut rows = vec![TraceRow {
        t: 0,
        robot,
        action: Action::Initial,
        attempted: true,
        detected: true,
        measurement: Some(z0),
        belief_hash: belief_hash(&belief),
        fallback: Fallback::None,
        nodes: 0,
        cube_max: 0.0,
        occupancy: 0.0,
    }];
    let mut snapshots = vec![(0, posterior.clone())];
    let reach = scenario.robot_speed * scenario.step_duration;

    for t in 1..t_len {
        let cube = gain_cube(kind, &posterior, &belief, &scenario, config, t)?;
        let (nodes, fallback) = extract_with_fallback(&cube, &config.planner.threshold);
        let n_nodes = nodes.len();
        let mut action = Action::Idle;
        if !nodes.is_empty() {
            let inst = OptwInstance {
                nodes,
                start: robot,
                start_time: t - 1,
                speed: scenario.robot_speed,
                step: scenario.step_duration,
            };
            let mcts_seed = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ t as u64;
            match mcts_plan(&inst, &config.planner.mcts, mcts_seed) {
                Ok(plan) => {
                    let n = &inst.nodes[plan.first()];
                    action = Action::MoveTo {
                        location: n.location,
                        t_open: n.t_open,
                        t_close: n.t_close,
                    };
                }
                Err(PlannerError::NoFeasibleAction) => {}
                Err(e) => return Err(e),
            }
        }
        let mut attempted = false;
        let mut detected = false;
        let mut measurement = None;
        if let Action::MoveTo {
            location,
            t_open,
            t_close,
        } = &action
        {
            let gap = location - robot;
            if gap.norm() <= reach {
                robot = *location;
            } else {
                robot += gap * (reach / gap.norm());
            }
            if robot == *location && (*t_open..=*t_close).contains(&t) {
                attempted = true;
                let p = sensor.detection_at(&robot, &truth[t]);
                if rng.random::<f64>() < p {
                    detected = true;
                    let z = truth[t] + noise(&mut rng, sensor.sigma_z);
                    measurement = Some(z);
                    state.base = update_detect(&state.base, None, &robot, t, &z, &sensor)?;
                    state.measurements.push(Measurement { t, z, x: robot })?;
                } else {
                    state.base = update_miss(&state.base, None, &robot, t, &sensor)?;
                }
            }
        }
        belief = state.belief();
        posterior = state.posterior(&belief);
        if detected {
            snapshots.push((t, posterior.clone()));
        }
        rows.push(TraceRow {
            t,
            robot,
            action,
            attempted,
            detected,
            measurement,
            belief_hash: belief_hash(&belief),
            fallback,
            nodes: n_nodes,
            cube_max: cube.max(),
            occupancy: cube.occupancy_fraction(OCCUPANCY_LEVEL),
        });
    }

    Ok(ExperimentTrace {
        target_id: scenario.target.id.clone(),
        gain_kind: kind,
        seed,
        rows,
        measurements: state.measurements,
        snapshots,
        final_posterior: posterior,
        final_belief: belief,
        duration_s: started.elapsed().as_secs_f64(),
    })
}
