//! Trained models saved together: mixture, word model, and motion statistics.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::gmm::HomotopicGmm;
use crate::vomp::VompModel;

use super::HarnessError;

#[derive(Clone, Debug)]
pub struct ModelBundle {
    pub gmm: HomotopicGmm,
    pub vomp: VompModel,
    /// Mean target speed of the training set (m/s).
    pub mean_speed: f64,
    /// Mean duration of one timestep (s).
    pub step_duration: f64,
}

#[derive(Serialize, Deserialize)]
struct BundleFile {
    gmm: Value,
    vomp: Value,
    mean_speed: f64,
    step_duration: f64,
}

impl ModelBundle {
    pub fn to_json(&self) -> String {
        let file = BundleFile {
            gmm: serde_json::from_str(&self.gmm.to_json()).expect("valid json"),
            vomp: serde_json::from_str(&self.vomp.to_json()).expect("valid json"),
            mean_speed: self.mean_speed,
            step_duration: self.step_duration,
        };
        serde_json::to_string(&file).expect("bundle serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let file: BundleFile = serde_json::from_str(text)?;
        Ok(Self {
            gmm: HomotopicGmm::from_json(&file.gmm.to_string())?,
            vomp: VompModel::from_json(&file.vomp.to_string())?,
            mean_speed: file.mean_speed,
            step_duration: file.step_duration,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), HarnessError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
