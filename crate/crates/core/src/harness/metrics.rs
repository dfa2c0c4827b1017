//! Evaluation metrics for a finished tracking run.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::gain::GainKind;
use crate::gmm::{condition, GmmComponent, GmmError, HomotopicGmm, Measurement, MeasurementSet};
use crate::planner::ExperimentTrace;
use crate::trajectory::Trajectory;

use super::HarnessError;

/// Floor applied to observed weights inside the weight divergence.
pub const KLD_WEIGHT_FLOOR: f64 = 1e-12;

/// Prior conditioned on every position of the test trajectory.
pub fn ground_truth_gmm(
    prior: &HomotopicGmm,
    truth: &Trajectory,
    sigma_z: f64,
) -> Result<HomotopicGmm, GmmError> {
    let items = truth
        .positions
        .iter()
        .enumerate()
        .map(|(t, p)| Measurement { t, z: *p, x: *p })
        .collect();
    condition(prior, &MeasurementSet::new(items, sigma_z)?)
}

/// `|y_t - mu_t|` against the mean of the highest-weight component.
pub fn displacement_error(posterior: &HomotopicGmm, truth: &Trajectory) -> Vec<f64> {
    let c = &posterior.components[posterior.argmax()];
    truth
        .positions
        .iter()
        .enumerate()
        .map(|(t, y)| (y - c.mean_at(t)).norm())
        .collect()
}

pub fn average(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// `sum_c w_gt log(w_gt / w_obs)` over aligned components.
pub fn weight_kld(gt: &HomotopicGmm, obs: &HomotopicGmm) -> Result<f64, HarnessError> {
    if gt.labels() != obs.labels() {
        return Err(HarnessError::LabelMismatch);
    }
    Ok(gt
        .components
        .iter()
        .zip(&obs.components)
        .filter(|(g, _)| g.weight > 0.0)
        .map(|(g, o)| g.weight * (g.weight.ln() - o.weight.max(KLD_WEIGHT_FLOOR).ln()))
        .sum::<f64>()
        .max(0.0))
}

/// A Gaussian with its covariance factored once.
pub struct FactoredGaussian {
    mean: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    log_det: f64,
}

impl FactoredGaussian {
    pub fn new(mean: &DVector<f64>, cov: &DMatrix<f64>) -> Result<Self, GmmError> {
        let chol = Cholesky::new(cov.clone()).ok_or_else(|| {
            GmmError::NumericalFailure("covariance is not positive definite".into())
        })?;
        let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        Ok(Self {
            mean: mean.clone(),
            chol,
            log_det,
        })
    }

    pub fn from_component(c: &GmmComponent) -> Result<Self, GmmError> {
        Self::new(&c.mean, &c.cov)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Closed-form `KL(f || g)` between Gaussians.
pub fn gaussian_kl(f: &FactoredGaussian, g: &FactoredGaussian) -> f64 {
    let d = f.dim() as f64;
    let lg = g.chol.l();
    let mut a = f.chol.l();
    lg.solve_lower_triangular_mut(&mut a);
    let mut diff = &g.mean - &f.mean;
    lg.solve_lower_triangular_mut(&mut diff);
    0.5 * (a.norm_squared() + diff.norm_squared() - d + g.log_det - f.log_det)
}

fn log_sum_weighted_exp(terms: impl Iterator<Item = (f64, f64)>) -> f64 {
    let logs: Vec<f64> = terms
        .filter(|(w, _)| *w > 0.0)
        .map(|(w, x)| w.ln() + x)
        .collect();
    crate::gmm::log_sum_exp(&logs)
}

/// Variational upper bound on `KL(f || g)` between mixtures.
pub fn variational_mi(f: &HomotopicGmm, g: &HomotopicGmm) -> Result<f64, GmmError> {
    let fs = f
        .components
        .iter()
        .map(FactoredGaussian::from_component)
        .collect::<Result<Vec<_>, _>>()?;
    let gs = g
        .components
        .iter()
        .map(FactoredGaussian::from_component)
        .collect::<Result<Vec<_>, _>>()?;
    variational_mi_factored(f, &fs, g, &gs)
}

/// [`variational_mi`] with the component factorizations supplied.
pub fn variational_mi_factored(
    f: &HomotopicGmm,
    fs: &[FactoredGaussian],
    g: &HomotopicGmm,
    gs: &[FactoredGaussian],
) -> Result<f64, GmmError> {
    let mut total = 0.0;
    for (a, fa) in f.components.iter().zip(fs) {
        if a.weight <= 0.0 {
            continue;
        }
        let num = log_sum_weighted_exp(
            f.components
                .iter()
                .zip(fs)
                .map(|(b, fb)| (b.weight, -gaussian_kl(fa, fb))),
        );
        let den = log_sum_weighted_exp(
            g.components
                .iter()
                .zip(gs)
                .map(|(b, gb)| (b.weight, -gaussian_kl(fa, gb))),
        );
        total += a.weight * (num - den);
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(GmmError::NumericalFailure("variational bound is not finite".into()))
    }
}

/// At least one detection after the initial one.
pub fn success(trace: &ExperimentTrace) -> bool {
    trace.rows.iter().any(|r| r.t > 0 && r.detected)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub target_id: String,
    pub gain_kind: GainKind,
    pub seed: u64,
    /// Displacement error per timestep (m).
    pub de: Vec<f64>,
    pub ade: f64,
    /// Weight divergence after each detection, starting with the one at `t = 0` (nats).
    pub kld: Vec<f64>,
    /// Variational mixture divergence after each detection (nats).
    pub dvar: Vec<f64>,
    pub measurements: usize,
    pub success: bool,
    pub runtime_s: f64,
    /// Heatcube occupancy above 1% of its maximum at the first replan.
    pub initial_occupancy: f64,
}

/// Scores a trace against its ground truth.
pub fn evaluate_trace(
    trace: &ExperimentTrace,
    prior: &HomotopicGmm,
    truth: &Trajectory,
    sigma_z: f64,
) -> Result<MetricsReport, HarnessError> {
    let gt = ground_truth_gmm(prior, truth, sigma_z)?;
    let de = displacement_error(&trace.final_posterior, truth);
    let gt_factors = gt
        .components
        .iter()
        .map(FactoredGaussian::from_component)
        .collect::<Result<Vec<_>, _>>()?;
    let mut kld = Vec::with_capacity(trace.snapshots.len());
    let mut dvar = Vec::with_capacity(trace.snapshots.len());
    for (_, post) in &trace.snapshots {
        kld.push(weight_kld(&gt, post)?);
        let factors = post
            .components
            .iter()
            .map(FactoredGaussian::from_component)
            .collect::<Result<Vec<_>, _>>()?;
        dvar.push(variational_mi_factored(&gt, &gt_factors, post, &factors)?);
    }
    Ok(MetricsReport {
        target_id: trace.target_id.clone(),
        gain_kind: trace.gain_kind,
        seed: trace.seed,
        ade: average(&de),
        de,
        kld,
        dvar,
        measurements: trace.measurement_count(),
        success: success(trace),
        runtime_s: trace.duration_s,
        initial_occupancy: trace.rows.get(1).map_or(0.0, |r| r.occupancy),
    })
}
