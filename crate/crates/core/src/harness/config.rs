//! Benchmark configuration (TOML) and the data and models it resolves to.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::gain::{GainKind, MetricMode, DEFAULT_KAPPA_R};
use crate::gmm::{fit, GmmFitConfig, HomotopicGmm, PartialMode, SensorModel};
use crate::planner::{MctsConfig, PlannerConfig, Threshold, ThresholdMode, TrackerConfig};
use crate::topology::{build_rays, Environment, HWord, Ray};
use crate::trajectory::{
    load_csv, split, synthesize_dataset, BoundaryMode, Dataset, SynthParams, CANONICAL_LEN,
};
use crate::vomp::VompModel;

use super::scenario::{three_obstacle_environment, three_obstacle_templates};
use super::HarnessError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentSection {
    /// Environment JSON; the built-in three-obstacle layout when absent.
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    /// Training CSV; synthetic data is generated when absent.
    pub train_csv: Option<PathBuf>,
    pub test_csv: Option<PathBuf>,
    pub t_len: usize,
    pub samples_per_class: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    /// Offset kernel length scale, in timesteps.
    pub length_scale: f64,
    /// Offset standard deviation (m).
    pub amplitude: f64,
    pub seed: u64,
    pub split_seed: u64,
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self {
            train_csv: None,
            test_csv: None,
            t_len: CANONICAL_LEN,
            samples_per_class: 60,
            train_per_class: 48,
            test_per_class: 12,
            length_scale: 25.0,
            amplitude: 0.25,
            seed: 7,
            split_seed: 11,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    #[default]
    Relative,
    Absolute,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSection {
    pub grid_cells: usize,
    pub threshold_kind: ThresholdKind,
    pub threshold: f64,
    pub min_gain: f64,
    pub kappa: f64,
    pub iterations: usize,
    /// Robot speed (m/s); `speed_factor` times the mean training speed when absent.
    pub robot_speed: Option<f64>,
    pub speed_factor: f64,
    pub kappa_r: f64,
    pub metric_mode: MetricMode,
    pub partial_mode: PartialMode,
}

impl Default for PlannerSection {
    fn default() -> Self {
        let p = PlannerConfig::default();
        Self {
            grid_cells: p.grid_cells,
            threshold_kind: ThresholdKind::Relative,
            threshold: 0.7,
            min_gain: p.threshold.min_gain,
            kappa: p.mcts.kappa,
            iterations: p.mcts.iterations,
            robot_speed: None,
            speed_factor: p.speed_factor,
            kappa_r: DEFAULT_KAPPA_R,
            metric_mode: MetricMode::default(),
            partial_mode: PartialMode::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VompSection {
    pub max_order: usize,
    pub alpha: f64,
}

impl Default for VompSection {
    fn default() -> Self {
        Self {
            max_order: 3,
            alpha: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seeds: Vec<u64>,
    pub gains: Vec<GainKind>,
    pub include_empty_class: bool,
    /// Only the first this-many test trajectories.
    pub max_test: Option<usize>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seeds: vec![0],
            gains: vec![GainKind::Homotopic, GainKind::Metric],
            include_empty_class: false,
            max_test: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub environment: EnvironmentSection,
    pub dataset: DatasetSection,
    pub sensor: SensorModel,
    pub planner: PlannerSection,
    pub vomp: VompSection,
    pub gmm: GmmFitConfig,
    pub run: RunSection,
}

impl BenchmarkConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        Ok(toml::from_str(text)?)
    }

    /// Reads a config file; relative paths inside it are taken from its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let mut config = Self::from_toml(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut Option<PathBuf>| {
            if let Some(q) = p.as_mut() {
                if q.is_relative() {
                    *q = base.join(&*q);
                }
            }
        };
        resolve(&mut config.environment.path);
        resolve(&mut config.dataset.train_csv);
        resolve(&mut config.dataset.test_csv);
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn tracker(&self) -> TrackerConfig {
        let p = &self.planner;
        let mode = match p.threshold_kind {
            ThresholdKind::Relative => ThresholdMode::Relative(p.threshold),
            ThresholdKind::Absolute => ThresholdMode::Absolute(p.threshold),
        };
        TrackerConfig {
            sensor: self.sensor,
            planner: PlannerConfig {
                grid_cells: p.grid_cells,
                threshold: Threshold {
                    mode,
                    min_gain: p.min_gain,
                },
                mcts: MctsConfig {
                    iterations: p.iterations,
                    kappa: p.kappa,
                },
                robot_speed: p.robot_speed,
                speed_factor: p.speed_factor,
            },
            kappa_r: p.kappa_r,
            metric_mode: p.metric_mode,
            partial_mode: p.partial_mode,
        }
    }
}

/// Everything a benchmark needs, built once from a config.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub env: Environment,
    pub rays: Vec<Ray>,
    pub train: Dataset,
    pub test: Dataset,
    pub gmm: HomotopicGmm,
    pub vomp: VompModel,
    /// Robot speed (m/s).
    pub robot_speed: f64,
    /// Duration of one timestep (s).
    pub step_duration: f64,
}

/// Mean duration of one timestep across the set.
pub fn mean_step_duration(data: &Dataset) -> f64 {
    let steps: Vec<f64> = data
        .trajectories()
        .iter()
        .filter(|t| t.len() > 1)
        .map(|t| (t.timestamps[t.len() - 1] - t.timestamps[0]) / (t.len() - 1) as f64)
        .collect();
    if steps.is_empty() {
        1.0
    } else {
        steps.iter().sum::<f64>() / steps.len() as f64
    }
}

/// Loads or generates the data, splits it, and fits the models.
pub fn prepare(config: &BenchmarkConfig) -> Result<Prepared, HarnessError> {
    let ds = &config.dataset;
    let env = match &config.environment.path {
        Some(p) => Environment::load(p)?,
        None => three_obstacle_environment(),
    };
    let rays = build_rays(&env)?;
    let (train, test) = match (&ds.train_csv, &ds.test_csv) {
        (Some(tr), Some(te)) => {
            let tr = load_csv(tr, &env, BoundaryMode::WarnAndSkip)?;
            let te = load_csv(te, &env, BoundaryMode::WarnAndSkip)?;
            (tr, te)
        }
        (None, None) => {
            let templates = three_obstacle_templates(config.run.include_empty_class);
            let all = synthesize_dataset(
                &env,
                &templates,
                &SynthParams {
                    samples_per_template: ds.samples_per_class,
                    length_scale: ds.length_scale,
                    amplitude: ds.amplitude,
                    seed: ds.seed,
                },
            )?;
            split(&all, ds.train_per_class, ds.test_per_class, ds.split_seed)?
        }
        _ => {
            return Err(HarnessError::Config(
                "train_csv and test_csv must be given together".into(),
            ))
        }
    };
    let (mut train, mut test) = (
        train.canonicalized(ds.t_len, &rays)?,
        test.canonicalized(ds.t_len, &rays)?,
    );
    if !config.run.include_empty_class {
        train = train.without_classes(&[HWord::empty()]);
        test = test.without_classes(&[HWord::empty()]);
    }
    let gmm = fit(&train, &config.gmm)?;
    let vomp = VompModel::fit(&train.word_counts(), config.vomp.max_order, config.vomp.alpha)?;
    let robot_speed = config
        .planner
        .robot_speed
        .unwrap_or(config.planner.speed_factor * train.mean_speed());
    let step_duration = mean_step_duration(&train);
    Ok(Prepared {
        env,
        rays,
        train,
        test,
        gmm,
        vomp,
        robot_speed,
        step_duration,
    })
}
