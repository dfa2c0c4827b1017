//! Metric (position-entropy) information gain baseline.
//!
//! Measurement noise grows with range: `R(x) = (sigma_z^2 + kappa_r * |x - mu_t|^2) I`.

use nalgebra::{Matrix2, Point2};
use serde::{Deserialize, Serialize};

use crate::gmm::{GmmError, HomotopicGmm, SensorModel};

use super::{DetectionKernel, GainField};

/// Default range coefficient of the measurement noise.
pub const DEFAULT_KAPPA_R: f64 = 0.01;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricMode {
    /// `p(d) * sum_c w_c [log det(S_c + R_c) - log det R_c]`: expected entropy reduction.
    #[default]
    EntropyReduction,
    /// `p(d) * sum_c w_c log det(S_c + R_c)`: the raw predictive entropy surrogate.
    PredictiveLogDet,
}

fn component_term(cov: &Matrix2<f64>, r: f64, mode: MetricMode) -> f64 {
    let ld = (cov + Matrix2::identity() * r).determinant().ln();
    match mode {
        MetricMode::EntropyReduction => ld - 2.0 * r.ln(),
        MetricMode::PredictiveLogDet => ld,
    }
}

/// Metric gain of measuring at `(x, t)` under the mixture.
pub fn metric_gain(
    gmm: &HomotopicGmm,
    x: &Point2<f64>,
    t: usize,
    sensor: &SensorModel,
    kappa_r: f64,
    mode: MetricMode,
) -> Result<f64, GmmError> {
    let mut p_detect = 0.0;
    let mut info = 0.0;
    for c in &gmm.components {
        let (m, s) = c.marginal_at_time(t)?;
        p_detect += c.weight * DetectionKernel::new(&m, &s, sensor).eval(x);
        let r = sensor.sigma_z * sensor.sigma_z + kappa_r * (x.coords - m).norm_squared();
        info += c.weight * component_term(&s, r, mode);
    }
    Ok(p_detect * info)
}

struct Slice {
    weight: f64,
    kernel: DetectionKernel,
    cov: Matrix2<f64>,
}

/// Metric gain over a time range with per-component marginals precomputed.
pub struct MetricField {
    t_start: usize,
    per_time: Vec<Vec<Slice>>,
    sigma2: f64,
    kappa_r: f64,
    mode: MetricMode,
}

impl MetricField {
    pub fn new(
        gmm: &HomotopicGmm,
        sensor: &SensorModel,
        kappa_r: f64,
        mode: MetricMode,
        times: std::ops::Range<usize>,
    ) -> Result<Self, GmmError> {
        let per_time = times
            .clone()
            .map(|t| {
                gmm.components
                    .iter()
                    .map(|c| {
                        let (m, s) = c.marginal_at_time(t)?;
                        Ok(Slice {
                            weight: c.weight,
                            kernel: DetectionKernel::new(&m, &s, sensor),
                            cov: s,
                        })
                    })
                    .collect::<Result<Vec<_>, GmmError>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            t_start: times.start,
            per_time,
            sigma2: sensor.sigma_z * sensor.sigma_z,
            kappa_r,
            mode,
        })
    }
}

impl GainField for MetricField {
    fn gain(&self, x: &Point2<f64>, t: usize) -> f64 {
        let Some(slices) = t.checked_sub(self.t_start).and_then(|i| self.per_time.get(i)) else {
            return 0.0;
        };
        let mut p_detect = 0.0;
        let mut info = 0.0;
        for s in slices {
            p_detect += s.weight * s.kernel.eval(x);
            let r = self.sigma2 + self.kappa_r * (x.coords - s.kernel.mean).norm_squared();
            info += s.weight * component_term(&s.cov, r, self.mode);
        }
        p_detect * info
    }
}
