//! Expected homotopic information gain of a position measurement.
//!
//! A measurement at `(x, t)` is worth, for each component `c` and each signed
//! ray crossing `l` that `c` might make between `t - 1` and `t`, the divergence
//! between the class belief after observing that crossing and the current one,
//! weighted by the component weight, the crossing probability, and the
//! probability of detecting the target at all. Non-crossing events carry no
//! information.

use std::collections::HashMap;

use nalgebra::Point2;

use crate::gmm::{GmmComponent, GmmError, HomotopicGmm, SensorModel};
use crate::topology::{partial_h_signature, segment_crossings, HWord, Ray};
use crate::vomp::{HomotopicBelief, VompModel};

use super::crossing::crossing_prob;
use super::{DetectionKernel, GainField};

/// Replaces an infinite divergence term.
pub const KL_CAP: f64 = 1e3;

/// `KL(b_next || b_prev)` over the support of `b_next`, in nats.
///
/// Terms where `b_prev` vanishes are capped at [`KL_CAP`].
pub fn homotopic_kl(b_prev: &HomotopicBelief, b_next: &HomotopicBelief) -> f64 {
    let mut kl = 0.0;
    for (h, q) in b_next.iter() {
        if q <= 0.0 {
            continue;
        }
        let p = b_prev.prob(h);
        kl += if p > 0.0 { q * (q / p).ln() } else { KL_CAP };
    }
    kl.max(0.0)
}

/// `sum_c w_c * gamma_c * sum_l p_{c,l} * kl_{c,l}`; `events[c]` lists `(p, kl)` pairs.
pub fn homotopic_double_sum(weights: &[f64], detection: &[f64], events: &[Vec<(f64, f64)>]) -> f64 {
    weights
        .iter()
        .zip(detection)
        .zip(events)
        .map(|((w, g), ev)| w * g * ev.iter().map(|(p, kl)| p * kl).sum::<f64>())
        .sum()
}

/// Inputs of a single gain evaluation.
#[derive(Clone, Copy, Debug)]
pub struct GainQuery<'a> {
    pub x: Point2<f64>,
    pub t: usize,
    pub gmm: &'a HomotopicGmm,
    pub belief: &'a HomotopicBelief,
    pub rays: &'a [Ray],
    pub model: &'a VompModel,
    pub sensor: SensorModel,
}

/// Memoized divergence of the belief after each candidate partial word.
struct KlCache<'a> {
    model: &'a VompModel,
    belief: &'a HomotopicBelief,
    memo: HashMap<HWord, Option<f64>>,
}

impl<'a> KlCache<'a> {
    fn new(model: &'a VompModel, belief: &'a HomotopicBelief) -> Self {
        Self {
            model,
            belief,
            memo: HashMap::new(),
        }
    }

    /// `None` when no training word starts with `rho`.
    fn get(&mut self, rho: &HWord) -> Option<f64> {
        if let Some(v) = self.memo.get(rho) {
            return *v;
        }
        let v = self
            .model
            .has_compatible(rho)
            .then(|| homotopic_kl(self.belief, &self.model.homotopic_belief(rho)));
        self.memo.insert(rho.clone(), v);
        v
    }
}

/// `(p, kl)` for every reachable signed crossing of `comp` between `t - 1` and `t`,
/// given the word `rho` of its mean path through `t - 1`.
fn event_terms(
    comp: &GmmComponent,
    t: usize,
    rho: &HWord,
    rays: &[Ray],
    kl: &mut KlCache<'_>,
) -> Result<Vec<(f64, f64)>, GmmError> {
    let mut out = Vec::new();
    for ray in rays {
        let p = crossing_prob(comp, ray, t - 1)?;
        for (letter, prob) in [(ray.letter, p.plus), (-ray.letter, p.minus)] {
            if prob <= 0.0 {
                continue;
            }
            if let Some(d) = kl.get(&rho.extended(letter)) {
                out.push((prob, d));
            }
        }
    }
    Ok(out)
}

/// Expected homotopic gain of measuring at `(q.x, q.t)`; zero at `t = 0`.
pub fn expected_homotopic_gain(q: &GainQuery<'_>) -> Result<f64, GmmError> {
    if q.t == 0 {
        return Ok(0.0);
    }
    let mut kl = KlCache::new(q.model, q.belief);
    let mut weights = Vec::new();
    let mut detection = Vec::new();
    let mut events = Vec::new();
    for c in &q.gmm.components {
        let rho = partial_h_signature(&c.mean_polyline(q.t - 1), q.rays);
        events.push(event_terms(c, q.t, &rho, q.rays, &mut kl)?);
        weights.push(c.weight);
        let (m, s) = c.marginal_at_time(q.t)?;
        detection.push(DetectionKernel::new(&m, &s, &q.sensor).eval(&q.x));
    }
    Ok(homotopic_double_sum(&weights, &detection, &events))
}

/// Homotopic gain over a time range, with the location-independent factors precomputed.
pub struct HomotopicField {
    t_start: usize,
    /// `per_time[t - t_start]` lists `(A_c(t), kernel_c(t))` for components with `A_c(t) > 0`.
    per_time: Vec<Vec<(f64, DetectionKernel)>>,
}

impl HomotopicField {
    pub fn new(
        gmm: &HomotopicGmm,
        belief: &HomotopicBelief,
        rays: &[Ray],
        model: &VompModel,
        sensor: &SensorModel,
        times: std::ops::Range<usize>,
    ) -> Result<Self, GmmError> {
        let mut kl = KlCache::new(model, belief);
        let mut per_time: Vec<Vec<(f64, DetectionKernel)>> =
            (times.start..times.end).map(|_| Vec::new()).collect();
        for c in &gmm.components {
            let first = times.start.max(1);
            if first >= times.end {
                continue;
            }
            // Word of the mean path through `first - 1`, then extended step by step.
            let mut rho = partial_h_signature(&c.mean_polyline(first - 1), rays);
            for t in first..times.end {
                if t > first {
                    for l in segment_crossings(&c.mean_at(t - 2), &c.mean_at(t - 1), rays) {
                        rho.push(l);
                    }
                }
                let a: f64 = c.weight
                    * event_terms(c, t, &rho, rays, &mut kl)?
                        .iter()
                        .map(|(p, d)| p * d)
                        .sum::<f64>();
                if a > 0.0 {
                    let (m, s) = c.marginal_at_time(t)?;
                    per_time[t - times.start].push((a, DetectionKernel::new(&m, &s, sensor)));
                }
            }
        }
        Ok(Self {
            t_start: times.start,
            per_time,
        })
    }

    /// True when the field is zero everywhere.
    pub fn is_zero(&self) -> bool {
        self.per_time.iter().all(Vec::is_empty)
    }
}

impl GainField for HomotopicField {
    fn gain(&self, x: &Point2<f64>, t: usize) -> f64 {
        match t.checked_sub(self.t_start).and_then(|i| self.per_time.get(i)) {
            Some(terms) => terms.iter().map(|(a, k)| a * k.eval(x)).sum(),
            None => 0.0,
        }
    }
}
