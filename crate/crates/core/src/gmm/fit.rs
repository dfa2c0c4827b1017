use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::trajectory::Dataset;

use super::kmeans::kmeans;
use super::{ComponentLabel, GmmComponent, GmmError, HomotopicGmm};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GmmFitConfig {
    /// Components per class.
    pub n_c: usize,
    /// Added to every covariance diagonal (m^2).
    pub jitter: f64,
    pub seed: u64,
    pub restarts: usize,
}

impl Default for GmmFitConfig {
    fn default() -> Self {
        Self {
            n_c: 1,
            jitter: 1e-6,
            seed: 0,
            restarts: 10,
        }
    }
}

fn sample_moments(points: &[&DVector<f64>], jitter: f64) -> (DVector<f64>, DMatrix<f64>) {
    let n = points.len();
    let dim = points[0].len();
    let mut mean = DVector::zeros(dim);
    for p in points {
        mean += *p;
    }
    mean /= n as f64;
    let mut cov = if n > 1 {
        let centered = DMatrix::from_fn(dim, n, |i, j| points[j][i] - mean[i]);
        (&centered * centered.transpose()) / (n - 1) as f64
    } else {
        DMatrix::zeros(dim, dim)
    };
    for i in 0..dim {
        cov[(i, i)] += jitter;
    }
    (mean, cov)
}

/// One Gaussian per class (or `n_c` k-means sub-modes per class), weighted by member fraction.
pub fn fit(train: &Dataset, config: &GmmFitConfig) -> Result<HomotopicGmm, GmmError> {
    if train.is_empty() {
        return Err(GmmError::EmptyTrainingSet);
    }
    let t_len = train.trajectories()[0].len();
    for t in train.trajectories() {
        if t.len() != t_len {
            return Err(GmmError::LengthMismatch {
                id: t.id.clone(),
                have: t.len(),
                expected: t_len,
            });
        }
    }
    let total = train.len() as f64;
    let n_c = config.n_c.max(1);
    let mut components = Vec::new();
    for (class, ids) in train.classes() {
        if ids.len() < n_c + 1 {
            return Err(GmmError::InsufficientClassMembers {
                class: class.clone(),
                have: ids.len(),
                need: n_c + 1,
            });
        }
        let flat: Vec<DVector<f64>> = train
            .class_members(class)
            .into_iter()
            .map(|t| t.flatten())
            .collect();
        let assign = if n_c == 1 {
            vec![0; flat.len()]
        } else {
            kmeans(&flat, n_c, config.restarts, config.seed)
        };
        for sub in 0..n_c {
            let members: Vec<&DVector<f64>> = flat
                .iter()
                .zip(&assign)
                .filter(|(_, &a)| a == sub)
                .map(|(p, _)| p)
                .collect();
            let (mean, cov) = sample_moments(&members, config.jitter);
            components.push(GmmComponent {
                label: ComponentLabel {
                    word: class.clone(),
                    sub_mode: sub + 1,
                },
                weight: members.len() as f64 / total,
                mean,
                cov,
            });
        }
    }
    Ok(HomotopicGmm { t_len, components })
}
