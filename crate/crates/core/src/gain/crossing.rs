//! Probability that a component's trajectory crosses a ray between two timesteps.
//!
//! With `d` the ray's unit direction and `delta(p) = cross(d, p - origin)` the
//! signed distance to the ray's line, a `+k` crossing is `delta_t < 0 < delta_{t+1}`.
//! The pair `(delta_t, delta_{t+1})` is jointly Gaussian under the component, so
//! each sign is a bivariate orthant probability. It is multiplied by the
//! probability that the along-ray coordinate of the step midpoint lies on the
//! ray segment.

use nalgebra::{Matrix4, Vector2, Vector4};

use crate::gmm::{GmmComponent, GmmError};
use crate::topology::Ray;

use super::bvn::{bvnu, norm_cdf};

/// Probabilities of the `+k` and `-k` crossing events.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CrossingProb {
    pub plus: f64,
    pub minus: f64,
}

impl CrossingProb {
    pub fn total(&self) -> f64 {
        self.plus + self.minus
    }
}

const MIN_STD: f64 = 1e-12;

/// Mean and covariance of `(x_t, y_t, x_{t+1}, y_{t+1})`.
pub fn joint_block(comp: &GmmComponent, t: usize) -> Result<(Vector4<f64>, Matrix4<f64>), GmmError> {
    if t + 1 >= comp.t_len() {
        return Err(GmmError::IndexOutOfRange {
            t: t + 1,
            len: comp.t_len(),
        });
    }
    let i = 2 * t;
    let mean = Vector4::from_fn(|r, _| comp.mean[i + r]);
    let cov = Matrix4::from_fn(|r, c| comp.cov[(i + r, i + c)]);
    Ok((mean, cov))
}

/// Crossing probabilities from the joint position block of two consecutive timesteps.
pub fn crossing_prob_joint(mean: &Vector4<f64>, cov: &Matrix4<f64>, ray: &Ray) -> CrossingProb {
    let len = ray.length();
    let d = ray.direction() / len;
    let n = Vector2::new(-d.y, d.x);
    let o = ray.origin.coords;
    let p0 = Vector2::new(mean[0], mean[1]) - o;
    let p1 = Vector2::new(mean[2], mean[3]) - o;
    // Projection rows: [delta_t, delta_{t+1}, along_t, along_{t+1}].
    let proj = Matrix4::new(
        n.x, n.y, 0.0, 0.0, //
        0.0, 0.0, n.x, n.y, //
        d.x, d.y, 0.0, 0.0, //
        0.0, 0.0, d.x, d.y,
    );
    let c = proj * cov * proj.transpose();
    let m0 = n.dot(&p0);
    let m1 = n.dot(&p1);
    let s0 = c[(0, 0)].max(0.0).sqrt().max(MIN_STD);
    let s1 = c[(1, 1)].max(0.0).sqrt().max(MIN_STD);
    let rho = (c[(0, 1)] / (s0 * s1)).clamp(-1.0, 1.0);
    // P(delta_t < 0, delta_{t+1} > 0) = P(-delta_t > 0, delta_{t+1} > 0).
    let plus = bvnu(m0 / s0, -m1 / s1, -rho);
    let minus = bvnu(-m0 / s0, m1 / s1, -rho);

    let along_mean = 0.5 * (d.dot(&p0) + d.dot(&p1));
    let along_var = 0.25 * (c[(2, 2)] + c[(3, 3)] + 2.0 * c[(2, 3)]);
    let sa = along_var.max(0.0).sqrt().max(MIN_STD);
    let extent = (norm_cdf((len - along_mean) / sa) - norm_cdf(-along_mean / sa)).max(0.0);
    CrossingProb {
        plus: plus * extent,
        minus: minus * extent,
    }
}

/// Probability that the component crosses `ray` between timesteps `t` and `t + 1`.
pub fn crossing_prob(comp: &GmmComponent, ray: &Ray, t: usize) -> Result<CrossingProb, GmmError> {
    let (mean, cov) = joint_block(comp, t)?;
    Ok(crossing_prob_joint(&mean, &cov, ray))
}
