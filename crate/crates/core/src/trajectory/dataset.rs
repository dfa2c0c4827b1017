use std::collections::BTreeMap;

use crate::topology::{h_signature, HWord, Ray};

use super::{canonicalize, Trajectory, TrajectoryError};

/// Trajectories with their full (unreduced) words and the word-to-ids class map.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    trajectories: Vec<Trajectory>,
    signatures: Vec<HWord>,
    classes: BTreeMap<HWord, Vec<String>>,
}

impl Dataset {
    /// Labels each trajectory by tracing it against `rays`.
    pub fn from_trajectories(trajectories: Vec<Trajectory>, rays: &[Ray]) -> Self {
        let signatures = trajectories
            .iter()
            .map(|t| h_signature(&t.positions, rays))
            .collect();
        Self::with_signatures(trajectories, signatures)
    }

    /// Uses caller-supplied labels.
    pub fn with_signatures(trajectories: Vec<Trajectory>, signatures: Vec<HWord>) -> Self {
        assert_eq!(trajectories.len(), signatures.len(), "one word per trajectory");
        let mut classes: BTreeMap<HWord, Vec<String>> = BTreeMap::new();
        for (t, h) in trajectories.iter().zip(&signatures) {
            classes.entry(h.clone()).or_default().push(t.id.clone());
        }
        Self {
            trajectories,
            signatures,
            classes,
        }
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn signatures(&self) -> &[HWord] {
        &self.signatures
    }

    pub fn classes(&self) -> &BTreeMap<HWord, Vec<String>> {
        &self.classes
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Trajectory, &HWord)> {
        self.trajectories.iter().zip(&self.signatures)
    }

    /// Members of one class, in dataset order.
    pub fn class_members(&self, h: &HWord) -> Vec<&Trajectory> {
        self.iter()
            .filter(|(_, s)| *s == h)
            .map(|(t, _)| t)
            .collect()
    }

    /// Full words with multiplicities, for language-model fitting.
    pub fn word_counts(&self) -> Vec<(HWord, usize)> {
        self.classes
            .iter()
            .map(|(h, ids)| (h.clone(), ids.len()))
            .collect()
    }

    /// Drops every trajectory whose word is in `classes`.
    pub fn without_classes(&self, classes: &[HWord]) -> Self {
        let (t, s): (Vec<_>, Vec<_>) = self
            .iter()
            .filter(|(_, h)| !classes.contains(h))
            .map(|(t, h)| (t.clone(), h.clone()))
            .unzip();
        Self::with_signatures(t, s)
    }

    /// Resamples every trajectory and re-labels against `rays`.
    pub fn canonicalized(&self, t_len: usize, rays: &[Ray]) -> Result<Self, TrajectoryError> {
        let trajs = self
            .trajectories
            .iter()
            .map(|t| canonicalize(t, t_len))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_trajectories(trajs, rays))
    }

    /// Concatenation of two datasets.
    pub fn merged(&self, other: &Dataset) -> Self {
        let mut t = self.trajectories.clone();
        let mut s = self.signatures.clone();
        t.extend(other.trajectories.iter().cloned());
        s.extend(other.signatures.iter().cloned());
        Self::with_signatures(t, s)
    }

    /// Mean speed across all trajectories.
    pub fn mean_speed(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.trajectories.iter().map(Trajectory::mean_speed).sum::<f64>() / self.len() as f64
    }
}

/// Groups trajectory ids by their full unreduced word.
pub fn cluster_by_signature(dataset: &Dataset, rays: &[Ray]) -> BTreeMap<HWord, Vec<String>> {
    let mut map: BTreeMap<HWord, Vec<String>> = BTreeMap::new();
    for t in dataset.trajectories() {
        map.entry(h_signature(&t.positions, rays))
            .or_default()
            .push(t.id.clone());
    }
    map
}
