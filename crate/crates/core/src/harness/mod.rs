//! Experiment orchestration: configuration, synthetic scenarios, evaluation
//! metrics, benchmark aggregation and export.

mod benchmark;
mod bundle;
mod config;
mod metrics;
mod scenario;

use thiserror::Error;

use crate::gain::GainError;
use crate::gmm::GmmError;
use crate::planner::PlannerError;
use crate::topology::TopologyError;
use crate::trajectory::TrajectoryError;
use crate::vomp::VompError;

pub use benchmark::{
    aggregate, experiment_seed, run_benchmark, run_prepared, write_report, BenchmarkReport,
    CurvePoint, GainSummary, Quartiles, RunRecord,
};
pub use bundle::ModelBundle;
pub use config::{
    mean_step_duration, prepare, BenchmarkConfig, DatasetSection, EnvironmentSection,
    PlannerSection, Prepared, RunSection, ThresholdKind, VompSection,
};
pub use metrics::{
    average, displacement_error, evaluate_trace, gaussian_kl, ground_truth_gmm, success,
    variational_mi, variational_mi_factored, weight_kld, FactoredGaussian, MetricsReport,
    KLD_WEIGHT_FLOOR,
};
pub use scenario::{three_obstacle_environment, three_obstacle_templates, TEMPLATE_LEN};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("component labels of the two mixtures differ")]
    LabelMismatch,
    #[error("config: {0}")]
    Config(String),
    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Gmm(#[from] GmmError),
    #[error(transparent)]
    Vomp(#[from] VompError),
    #[error(transparent)]
    Gain(#[from] GainError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
