use serde::{Deserialize, Serialize};

use crate::topology::{partial_h_signature, Ray};
use crate::vomp::{HomotopicBelief, VompModel};

use super::{HomotopicGmm, MeasurementSet};

/// Where partial words come from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartialMode {
    /// Each component's mean polyline up to the last observed timestep.
    #[default]
    PosteriorMeans,
    /// The polyline through the raw measurements.
    RawPolyline,
}

/// Class belief mixed over components: `sum_c w_c * p(h | rho_c)`, where `rho_c`
/// is the word of component `c`'s mean polyline over timesteps `0..=upto`.
pub fn marginalized_belief(
    gmm: &HomotopicGmm,
    rays: &[Ray],
    model: &VompModel,
    upto: usize,
) -> HomotopicBelief {
    let mut pairs = Vec::new();
    for c in &gmm.components {
        let rho = partial_h_signature(&c.mean_polyline(upto), rays);
        let b = model.homotopic_belief(&rho);
        pairs.extend(b.iter().map(|(h, p)| (h.clone(), c.weight * p)));
    }
    HomotopicBelief::from_weights(pairs)
}

/// Belief from the word of the polyline through the observed positions.
pub fn measurement_belief(m: &MeasurementSet, rays: &[Ray], model: &VompModel) -> HomotopicBelief {
    let pts: Vec<_> = m.items().iter().map(|it| it.z).collect();
    model.homotopic_belief(&partial_h_signature(&pts, rays))
}
