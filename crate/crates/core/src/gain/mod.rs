//! Expected information gain fields: homotopic (class belief) and metric (position entropy).

mod bvn;
mod crossing;
mod dpi;
mod homotopic;
mod metric;

use nalgebra::{Matrix2, Point2, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gmm::{GmmError, SensorModel};

pub use bvn::{bvnu, norm_cdf};
pub use crossing::{crossing_prob, crossing_prob_joint, joint_block, CrossingProb};
pub use dpi::{dpi_check, DpiToy, ENUMERATION_BUDGET};
pub use homotopic::{
    expected_homotopic_gain, homotopic_double_sum, homotopic_kl, GainQuery, HomotopicField, KL_CAP,
};
pub use metric::{metric_gain, MetricField, MetricMode, DEFAULT_KAPPA_R};

#[derive(Debug, Error)]
pub enum GainError {
    #[error("toy has {states} joint states, above the enumeration budget")]
    ToyTooLarge { states: usize },
    #[error("invalid toy: {0}")]
    InvalidToy(String),
    #[error(transparent)]
    Gmm(#[from] GmmError),
}

/// Which information measure drives the planner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainKind {
    Homotopic,
    Metric,
}

impl GainKind {
    pub fn name(&self) -> &'static str {
        match self {
            GainKind::Homotopic => "homotopic",
            GainKind::Metric => "metric",
        }
    }
}

impl std::str::FromStr for GainKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "homotopic" => Ok(GainKind::Homotopic),
            "metric" => Ok(GainKind::Metric),
            other => Err(format!("unknown gain kind {other:?}")),
        }
    }
}

impl std::fmt::Display for GainKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Expected gain of measuring at location `x` at timestep `t`.
pub trait GainField {
    fn gain(&self, x: &Point2<f64>, t: usize) -> f64;
}

impl<F: Fn(&Point2<f64>, usize) -> f64> GainField for F {
    fn gain(&self, x: &Point2<f64>, t: usize) -> f64 {
        self(x, t)
    }
}

/// Detection probability against one Gaussian position marginal, with the
/// location-independent parts precomputed.
#[derive(Clone, Copy, Debug)]
pub(crate) struct DetectionKernel {
    pub mean: Vector2<f64>,
    inv: Matrix2<f64>,
    beta: f64,
}

impl DetectionKernel {
    pub fn new(mean: &Vector2<f64>, cov: &Matrix2<f64>, sensor: &SensorModel) -> Self {
        let r2 = sensor.radius * sensor.radius;
        let beta = sensor.peak / (cov / r2 + Matrix2::identity()).determinant().sqrt();
        let inv = (cov + Matrix2::identity() * r2)
            .try_inverse()
            .unwrap_or_else(Matrix2::zeros);
        Self {
            mean: *mean,
            inv,
            beta,
        }
    }

    pub fn eval(&self, x: &Point2<f64>) -> f64 {
        let d = x.coords - self.mean;
        self.beta * (-0.5 * d.dot(&(self.inv * d))).exp()
    }
}
