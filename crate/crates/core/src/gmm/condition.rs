use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::vomp::HomotopicBelief;

use super::{GmmComponent, GmmError, HomotopicGmm, MeasurementSet};

/// Weights are floored here instead of pruned, so component labels stay aligned.
pub const WEIGHT_FLOOR: f64 = 1e-12;

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Softmax of log-weights, floored and renormalized.
pub(crate) fn normalize_log_weights(log_w: &[f64]) -> Result<Vec<f64>, GmmError> {
    let lse = log_sum_exp(log_w);
    if !lse.is_finite() {
        return Err(GmmError::AllWeightsZero);
    }
    let w: Vec<f64> = log_w
        .iter()
        .map(|l| (l - lse).exp().max(WEIGHT_FLOOR))
        .collect();
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / total).collect())
}

pub(crate) fn normalize_weights(w: &[f64]) -> Result<Vec<f64>, GmmError> {
    let log_w: Vec<f64> = w.iter().map(|x| x.ln()).collect();
    normalize_log_weights(&log_w)
}

/// Scales each component's weight by the belief in its class and renormalizes.
pub fn scale_by_belief(gmm: &HomotopicGmm, b: &HomotopicBelief) -> Result<HomotopicGmm, GmmError> {
    let w: Vec<f64> = gmm
        .components
        .iter()
        .map(|c| c.weight * b.prob(&c.label.word))
        .collect();
    if w.iter().all(|&x| x <= 0.0) {
        return Err(GmmError::AllWeightsZero);
    }
    Ok(gmm.with_weights(&normalize_weights(&w)?))
}

/// Posterior of one component given the observed blocks, and the log marginal likelihood.
pub(crate) fn condition_component(
    comp: &GmmComponent,
    m: &MeasurementSet,
) -> Result<(GmmComponent, f64), GmmError> {
    let n = comp.mean.len();
    let idx: Vec<usize> = m
        .items()
        .iter()
        .flat_map(|it| [2 * it.t, 2 * it.t + 1])
        .collect();
    if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
        return Err(GmmError::IndexOutOfRange {
            t: bad / 2,
            len: n / 2,
        });
    }
    let k = idx.len();
    let z = DVector::from_iterator(k, m.items().iter().flat_map(|it| [it.z.x, it.z.y]));
    let mu_o = DVector::from_fn(k, |i, _| comp.mean[idx[i]]);
    // Rows of the covariance at the observed coordinates (k x n).
    let sigma_on = DMatrix::from_fn(k, n, |i, j| comp.cov[(idx[i], j)]);
    let mut s = DMatrix::from_fn(k, k, |i, j| sigma_on[(i, idx[j])]);
    let noise = m.sigma_z * m.sigma_z;
    for i in 0..k {
        s[(i, i)] += noise;
    }
    let chol = s.clone().cholesky().ok_or_else(|| {
        GmmError::NumericalFailure("innovation covariance is not positive definite".into())
    })?;
    let resid = &z - &mu_o;
    let solved_r = chol.solve(&resid);
    let solved_rows = chol.solve(&sigma_on);
    let mean = &comp.mean + sigma_on.transpose() * &solved_r;
    let mut cov = &comp.cov - sigma_on.transpose() * &solved_rows;
    symmetrize(&mut cov);
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let log_lik = -0.5 * (resid.dot(&solved_r) + log_det + k as f64 * (2.0 * PI).ln());
    Ok((
        GmmComponent {
            label: comp.label.clone(),
            weight: comp.weight,
            mean,
            cov,
        },
        log_lik,
    ))
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Joint Gaussian conditioning of every component on all measurements, with
/// weights rescaled by each component's likelihood of the observations.
pub fn condition(gmm: &HomotopicGmm, m: &MeasurementSet) -> Result<HomotopicGmm, GmmError> {
    if m.is_empty() {
        return Ok(gmm.clone());
    }
    let mut comps = Vec::with_capacity(gmm.len());
    let mut log_w = Vec::with_capacity(gmm.len());
    for c in &gmm.components {
        let (post, ll) = condition_component(c, m)?;
        log_w.push(c.weight.ln() + ll);
        comps.push(post);
    }
    let w = normalize_log_weights(&log_w)?;
    for (c, w) in comps.iter_mut().zip(w) {
        c.weight = w;
    }
    Ok(HomotopicGmm {
        t_len: gmm.t_len,
        components: comps,
    })
}
