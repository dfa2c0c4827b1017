use nalgebra::{Matrix2, Point2, Vector2};
use serde::{Deserialize, Serialize};

use crate::vomp::HomotopicBelief;

use super::condition::{condition, normalize_weights};
use super::{GmmComponent, GmmError, HomotopicGmm, Measurement, MeasurementSet};

/// Range-limited position sensor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorModel {
    /// Detection probability with the target exactly at the sensor.
    pub peak: f64,
    /// Length scale of the detection falloff (m).
    pub radius: f64,
    /// Position noise standard deviation (m).
    pub sigma_z: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self {
            peak: 0.95,
            radius: 1.5,
            sigma_z: 0.1,
        }
    }
}

impl SensorModel {
    /// Detection probability for a target at a known position.
    pub fn detection_at(&self, x: &Point2<f64>, y: &Point2<f64>) -> f64 {
        let d2 = (x - y).norm_squared();
        self.peak * (-d2 / (2.0 * self.radius * self.radius)).exp()
    }
}

/// Detection probability averaged over a Gaussian target position `N(mean, cov)`.
pub fn detection_prob_2d(
    mean: &Vector2<f64>,
    cov: &Matrix2<f64>,
    x: &Point2<f64>,
    radius: f64,
    peak: f64,
) -> f64 {
    let r2 = radius * radius;
    let scaled = cov / r2 + Matrix2::identity();
    let beta = peak / scaled.determinant().sqrt();
    let m = cov + Matrix2::identity() * r2;
    let theta = x.coords - mean;
    let q = match m.try_inverse() {
        Some(inv) => theta.dot(&(inv * theta)),
        None => f64::INFINITY,
    };
    beta * (-0.5 * q).exp()
}

/// Probability that a sensor at `x` detects a target distributed as the
/// component's position at timestep `t`.
pub fn detection_prob(
    comp: &GmmComponent,
    x: &Point2<f64>,
    t: usize,
    radius: f64,
    peak: f64,
) -> Result<f64, GmmError> {
    let (mean, cov) = comp.marginal_at_time(t)?;
    Ok(detection_prob_2d(&mean, &cov, x, radius, peak))
}

/// Multiplies weights by per-component factors and renormalizes.
pub fn reweight(gmm: &HomotopicGmm, factors: &[f64]) -> Result<HomotopicGmm, GmmError> {
    let w: Vec<f64> = gmm
        .components
        .iter()
        .zip(factors)
        .map(|(c, f)| c.weight * f)
        .collect();
    if w.iter().all(|&x| x <= 0.0) {
        return Err(GmmError::AllWeightsZero);
    }
    Ok(gmm.with_weights(&normalize_weights(&w)?))
}

fn belief_factors(gmm: &HomotopicGmm, belief: Option<&HomotopicBelief>) -> Vec<f64> {
    gmm.components
        .iter()
        .map(|c| belief.map_or(1.0, |b| b.prob(&c.label.word)))
        .collect()
}

fn detection_factors(
    gmm: &HomotopicGmm,
    x: &Point2<f64>,
    t: usize,
    sensor: &SensorModel,
) -> Result<Vec<f64>, GmmError> {
    gmm.components
        .iter()
        .map(|c| detection_prob(c, x, t, sensor.radius, sensor.peak))
        .collect()
}

/// Weight and state update after a detection of `z` at timestep `t` from `x`.
///
/// Without a belief the class factor is omitted.
pub fn update_detect(
    gmm: &HomotopicGmm,
    belief: Option<&HomotopicBelief>,
    x: &Point2<f64>,
    t: usize,
    z: &Point2<f64>,
    sensor: &SensorModel,
) -> Result<HomotopicGmm, GmmError> {
    let gamma = detection_factors(gmm, x, t, sensor)?;
    let b = belief_factors(gmm, belief);
    let f: Vec<f64> = gamma.iter().zip(&b).map(|(g, b)| g * b).collect();
    let weighted = reweight(gmm, &f)?;
    let m = MeasurementSet::new(
        vec![Measurement { t, z: *z, x: *x }],
        sensor.sigma_z,
    )?;
    condition(&weighted, &m)
}

/// Weight update after a failed detection attempt at timestep `t` from `x`.
pub fn update_miss(
    gmm: &HomotopicGmm,
    belief: Option<&HomotopicBelief>,
    x: &Point2<f64>,
    t: usize,
    sensor: &SensorModel,
) -> Result<HomotopicGmm, GmmError> {
    let gamma = detection_factors(gmm, x, t, sensor)?;
    let b = belief_factors(gmm, belief);
    let f: Vec<f64> = gamma.iter().zip(&b).map(|(g, b)| (1.0 - g) * b).collect();
    reweight(gmm, &f)
}
