//! Homotopy-labeled Gaussian mixtures over flattened trajectories.
//!
//! A trajectory of `T` points is the `2T` vector `[x_0, y_0, x_1, y_1, ...]`.
//! Each component carries the full word of the class it was fit to and a
//! sub-mode index within that class.

mod belief;
mod condition;
mod detection;
mod fit;
mod kmeans;

use std::path::Path;

use nalgebra::{DMatrix, DVector, Matrix2, Point2, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::HWord;

pub use belief::{marginalized_belief, measurement_belief, PartialMode};
pub use condition::{condition, log_sum_exp, scale_by_belief, WEIGHT_FLOOR};
pub use detection::{detection_prob, reweight, update_detect, update_miss, SensorModel};
pub use fit::{fit, GmmFitConfig};
pub use kmeans::kmeans;

#[derive(Debug, Error)]
pub enum GmmError {
    #[error("class {class} has {have} members, at least {need} required")]
    InsufficientClassMembers { class: HWord, have: usize, need: usize },
    #[error("every component weight is zero")]
    AllWeightsZero,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("timestep {t} outside 0..{len}")]
    IndexOutOfRange { t: usize, len: usize },
    #[error("invalid measurements: {0}")]
    InvalidMeasurements(String),
    #[error("trajectory {id:?} has {have} points, expected {expected}")]
    LengthMismatch { id: String, have: usize, expected: usize },
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Class word plus 1-based sub-mode index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ComponentLabel {
    pub word: HWord,
    pub sub_mode: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GmmComponent {
    pub label: ComponentLabel,
    pub weight: f64,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GmmComponent {
    /// Number of timesteps.
    pub fn t_len(&self) -> usize {
        self.mean.len() / 2
    }

    /// Mean and covariance of the position at timestep `t`.
    pub fn marginal_at_time(&self, t: usize) -> Result<(Vector2<f64>, Matrix2<f64>), GmmError> {
        if t >= self.t_len() {
            return Err(GmmError::IndexOutOfRange {
                t,
                len: self.t_len(),
            });
        }
        let i = 2 * t;
        let mean = Vector2::new(self.mean[i], self.mean[i + 1]);
        let cov = Matrix2::new(
            self.cov[(i, i)],
            self.cov[(i, i + 1)],
            self.cov[(i + 1, i)],
            self.cov[(i + 1, i + 1)],
        );
        Ok((mean, cov))
    }

    /// Mean position at timestep `t`.
    pub fn mean_at(&self, t: usize) -> Point2<f64> {
        Point2::new(self.mean[2 * t], self.mean[2 * t + 1])
    }

    /// Mean positions for timesteps `0..=t`.
    pub fn mean_polyline(&self, t: usize) -> Vec<Point2<f64>> {
        (0..=t.min(self.t_len() - 1)).map(|k| self.mean_at(k)).collect()
    }
}

/// Block extraction as a free function.
pub fn marginal_at_time(
    comp: &GmmComponent,
    t: usize,
) -> Result<(Vector2<f64>, Matrix2<f64>), GmmError> {
    comp.marginal_at_time(t)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HomotopicGmm {
    pub t_len: usize,
    pub components: Vec<GmmComponent>,
}

impl HomotopicGmm {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    pub fn labels(&self) -> Vec<ComponentLabel> {
        self.components.iter().map(|c| c.label.clone()).collect()
    }

    /// Index of the heaviest component (lowest index on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, c) in self.components.iter().enumerate() {
            if c.weight > self.components[best].weight {
                best = i;
            }
        }
        best
    }

    /// Copy with new weights.
    pub fn with_weights(&self, weights: &[f64]) -> Self {
        let mut out = self.clone();
        for (c, &w) in out.components.iter_mut().zip(weights) {
            c.weight = w;
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GmmFile::from(self)).expect("gmm serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GmmError> {
        let file: GmmFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GmmError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GmmError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct ComponentFile {
    label: ComponentLabel,
    weight: f64,
    mean: Vec<f64>,
    /// Row-major.
    cov: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct GmmFile {
    t_len: usize,
    components: Vec<ComponentFile>,
}

impl From<&HomotopicGmm> for GmmFile {
    fn from(g: &HomotopicGmm) -> Self {
        Self {
            t_len: g.t_len,
            components: g
                .components
                .iter()
                .map(|c| ComponentFile {
                    label: c.label.clone(),
                    weight: c.weight,
                    mean: c.mean.as_slice().to_vec(),
                    cov: c.cov.transpose().as_slice().to_vec(),
                })
                .collect(),
        }
    }
}

impl TryFrom<GmmFile> for HomotopicGmm {
    type Error = GmmError;

    fn try_from(f: GmmFile) -> Result<Self, GmmError> {
        let n = 2 * f.t_len;
        let components = f
            .components
            .into_iter()
            .map(|c| {
                if c.mean.len() != n || c.cov.len() != n * n {
                    return Err(GmmError::NumericalFailure(format!(
                        "component {:?} has the wrong dimension",
                        c.label
                    )));
                }
                Ok(GmmComponent {
                    label: c.label,
                    weight: c.weight,
                    mean: DVector::from_vec(c.mean),
                    cov: DMatrix::from_row_slice(n, n, &c.cov),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            t_len: f.t_len,
            components,
        })
    }
}

/// One position observation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub t: usize,
    /// Observed target position.
    pub z: Point2<f64>,
    /// Where the sensor was.
    pub x: Point2<f64>,
}

/// Time-ordered observations with isotropic noise scale `sigma_z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSet {
    items: Vec<Measurement>,
    pub sigma_z: f64,
}

impl MeasurementSet {
    pub fn new(items: Vec<Measurement>, sigma_z: f64) -> Result<Self, GmmError> {
        if items.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(GmmError::InvalidMeasurements(
                "timesteps must strictly increase".into(),
            ));
        }
        if !(sigma_z >= 0.0) {
            return Err(GmmError::InvalidMeasurements("sigma_z must be >= 0".into()));
        }
        Ok(Self { items, sigma_z })
    }

    pub fn empty(sigma_z: f64) -> Self {
        Self {
            items: Vec::new(),
            sigma_z,
        }
    }

    pub fn items(&self) -> &[Measurement] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn last_t(&self) -> Option<usize> {
        self.items.last().map(|m| m.t)
    }

    /// Appends a later observation.
    pub fn push(&mut self, m: Measurement) -> Result<(), GmmError> {
        if self.last_t().is_some_and(|t| m.t <= t) {
            return Err(GmmError::InvalidMeasurements(
                "timesteps must strictly increase".into(),
            ));
        }
        self.items.push(m);
        Ok(())
    }
}
