//! Synthetic trajectories: smooth Gaussian-process perturbations of template paths,
//! rejected unless they stay in bounds, miss every obstacle, and keep the template's word.

use std::collections::HashMap;

use nalgebra::{Cholesky, DMatrix, DVector, Point2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::topology::{build_rays, h_signature, Environment, HWord};

use super::{Dataset, Trajectory, TrajectoryError};

/// Consecutive rejections tolerated for a single sample.
pub const MAX_REJECTIONS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub samples_per_template: usize,
    /// Kernel length scale, in timesteps.
    pub length_scale: f64,
    /// Pointwise standard deviation of the offset, in meters.
    pub amplitude: f64,
    pub seed: u64,
}

/// Draws per-coordinate offsets from a zero-mean squared-exponential process on the time index.
#[derive(Clone, Debug)]
pub struct GpSampler {
    len: usize,
    factor: Option<DMatrix<f64>>,
}

impl GpSampler {
    pub fn new(len: usize, length_scale: f64, amplitude: f64) -> Result<Self, TrajectoryError> {
        if amplitude == 0.0 {
            return Ok(Self { len, factor: None });
        }
        let var = amplitude * amplitude;
        let kernel = DMatrix::from_fn(len, len, |i, j| {
            let d = i as f64 - j as f64;
            var * (-0.5 * d * d / (length_scale * length_scale)).exp()
        });
        // The kernel matrix is numerically singular for long length scales.
        let mut jitter = 1e-10 * var;
        while jitter <= 1e-2 * var {
            let k = &kernel + DMatrix::identity(len, len) * jitter;
            if let Some(ch) = Cholesky::new(k) {
                return Ok(Self {
                    len,
                    factor: Some(ch.l()),
                });
            }
            jitter *= 10.0;
        }
        Err(TrajectoryError::NumericalFailure(
            "kernel matrix is not positive definite".into(),
        ))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// One draw of the offset process.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        match &self.factor {
            None => DVector::zeros(self.len),
            Some(l) => {
                let z = DVector::from_fn(self.len, |_, _| rng.sample::<f64, _>(StandardNormal));
                l * z
            }
        }
    }
}

fn acceptable(candidate: &[Point2<f64>], env: &Environment, word: &HWord, rays: &[crate::topology::Ray]) -> bool {
    let b = env.bounds();
    let (first, last) = (candidate[0], candidate[candidate.len() - 1]);
    candidate.iter().all(|p| b.contains(p))
        && env.is_near_boundary(&first)
        && env.is_near_boundary(&last)
        && !env.polyline_hits_obstacle(candidate)
        && h_signature(candidate, rays) == *word
}

/// Generates `samples_per_template` perturbed copies of every template.
pub fn synthesize_dataset(
    env: &Environment,
    templates: &[Trajectory],
    params: &SynthParams,
) -> Result<Dataset, TrajectoryError> {
    let rays = build_rays(env)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut samplers: HashMap<usize, GpSampler> = HashMap::new();
    let mut out = Vec::with_capacity(templates.len() * params.samples_per_template);
    let mut words = Vec::with_capacity(out.capacity());
    for template in templates {
        let word = h_signature(&template.positions, &rays);
        let n = template.len();
        if !samplers.contains_key(&n) {
            samplers.insert(n, GpSampler::new(n, params.length_scale, params.amplitude)?);
        }
        let sampler = &samplers[&n];
        for k in 0..params.samples_per_template {
            let mut rejections = 0;
            let positions = loop {
                let dx = sampler.sample(&mut rng);
                let dy = sampler.sample(&mut rng);
                let candidate: Vec<Point2<f64>> = template
                    .positions
                    .iter()
                    .enumerate()
                    .map(|(i, p)| Point2::new(p.x + dx[i], p.y + dy[i]))
                    .collect();
                if acceptable(&candidate, env, &word, &rays) {
                    break candidate;
                }
                rejections += 1;
                if rejections >= MAX_REJECTIONS {
                    return Err(TrajectoryError::RejectionBudgetExceeded {
                        template: template.id.clone(),
                        rejections,
                    });
                }
            };
            out.push(Trajectory::new(
                format!("{}-{k:03}", template.id),
                positions,
                template.timestamps.clone(),
            ));
            words.push(word.clone());
        }
    }
    Ok(Dataset::with_signatures(out, words))
}
