//! Independent oracles and generators shared by the integration tests.
//!
//! Nothing here calls into the code paths it is used to check.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Point2};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use homotopic_tracking::gmm::{ComponentLabel, GmmComponent, HomotopicGmm};
use homotopic_tracking::topology::{Bounds, Environment, HWord, Obstacle};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Exact segment/ray crossings.

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coordinate")
}

fn cross_q(ax: &BigRational, ay: &BigRational, bx: &BigRational, by: &BigRational) -> BigRational {
    ax * by - ay * bx
}

/// Signed crossings of segment `p0 -> p1` with the rays `(letter, origin, endpoint)`,
/// in exact rational arithmetic, ordered by the segment parameter.
///
/// Half-open on the segment (`s in [0, 1)`), closed on the ray; parallel or
/// tangential contacts are not crossings.
pub fn exact_crossings(
    p0: &Point2<f64>,
    p1: &Point2<f64>,
    rays: &[(i32, Point2<f64>, Point2<f64>)],
) -> Vec<i32> {
    let zero = BigRational::from_integer(BigInt::from(0));
    let one = BigRational::from_integer(BigInt::from(1));
    let (px, py) = (q(p0.x), q(p0.y));
    let (dx, dy) = (q(p1.x) - &px, q(p1.y) - &py);
    let mut hits: Vec<(BigRational, i32)> = Vec::new();
    for (letter, o, e) in rays {
        let (ox, oy) = (q(o.x), q(o.y));
        let (rx, ry) = (q(e.x) - &ox, q(e.y) - &oy);
        let denom = cross_q(&dx, &dy, &rx, &ry);
        if denom == zero {
            continue;
        }
        let (wx, wy) = (&ox - &px, &oy - &py);
        let s = cross_q(&wx, &wy, &rx, &ry) / &denom;
        let u = cross_q(&wx, &wy, &dx, &dy) / &denom;
        if s < zero || s >= one || u < zero || u > one {
            continue;
        }
        // Sign of cross(ray direction, segment direction).
        let side = cross_q(&rx, &ry, &dx, &dy);
        let l = if side > zero { *letter } else { -*letter };
        hits.push((s, l));
    }
    hits.sort_by(|a, b| a.0.cmp(&b.0));
    hits.into_iter().map(|(_, l)| l).collect()
}

/// Cancels adjacent inverse pairs with a stack, independent of the library's reduction.
pub fn stack_reduce(w: &[i32]) -> Vec<i32> {
    let mut out: Vec<i32> = Vec::new();
    for &l in w {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Random environments and obstacle-avoiding polylines.

/// Three separated rectangles in a 20 x 10 box; all rays go down, or all up.
pub fn row_environment(up: bool) -> Environment {
    let ray = |cx: f64| Some(Point2::new(cx, if up { 10.0 } else { 0.0 }));
    let rect = |x0: f64, y0: f64, x1: f64, y1: f64| {
        Obstacle::new(
            vec![
                Point2::new(x0, y0),
                Point2::new(x1, y0),
                Point2::new(x1, y1),
                Point2::new(x0, y1),
            ],
            None,
            ray(0.5 * (x0 + x1)),
        )
        .unwrap()
    };
    Environment::new(
        Bounds::new(0.0, 0.0, 20.0, 10.0),
        vec![
            rect(3.0, 3.0, 5.0, 6.0),
            rect(8.5, 4.0, 11.0, 7.0),
            rect(14.0, 2.5, 16.5, 5.5),
        ],
    )
    .unwrap()
}

/// A point on the boundary edges not touched by rays (top edge is excluded when rays go up).
pub fn free_boundary_point<R: Rng>(rng: &mut R, up: bool) -> Point2<f64> {
    match rng.random_range(0..3) {
        0 => Point2::new(0.0, rng.random_range(0.5..9.5)),
        1 => Point2::new(20.0, rng.random_range(0.5..9.5)),
        _ => Point2::new(rng.random_range(0.5..19.5), if up { 0.0 } else { 10.0 }),
    }
}

/// Random boundary-to-boundary polyline avoiding all obstacles.
pub fn random_polyline<R: Rng>(rng: &mut R, env: &Environment, up: bool, interior: usize) -> Vec<Point2<f64>> {
    'retry: loop {
        let mut path = vec![free_boundary_point(rng, up)];
        for _ in 0..interior {
            let mut ok = false;
            for _ in 0..200 {
                let p = Point2::new(rng.random_range(0.2..19.8), rng.random_range(0.2..9.8));
                let last = *path.last().unwrap();
                if env.obstacles().iter().all(|o| !o.contains(&p))
                    && env.segment_hits_obstacle(&last, &p).is_none()
                {
                    path.push(p);
                    ok = true;
                    break;
                }
            }
            if !ok {
                continue 'retry;
            }
        }
        let end = free_boundary_point(rng, up);
        if env.segment_hits_obstacle(path.last().unwrap(), &end).is_none() {
            path.push(end);
            return path;
        }
    }
}

/// Net count of letter `k` in a word.
pub fn net(w: &[i32], k: i32) -> i32 {
    w.iter().map(|&l| if l == k { 1 } else if l == -k { -1 } else { 0 }).sum()
}

// ---------------------------------------------------------------------------
// Gaussian oracles.

pub fn random_spd<R: Rng>(rng: &mut R, n: usize, scale: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    (&a * a.transpose()) * (scale / n as f64) + DMatrix::identity(n, n) * (0.05 * scale)
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

/// Lower Cholesky factor computed by the textbook column recurrence.
pub fn cholesky_lower(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        assert!(d > 0.0, "matrix is not positive definite");
        l[(j, j)] = d.sqrt();
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / l[(j, j)];
        }
    }
    l
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn gauss_jordan_inverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut inv = DMatrix::identity(n, n);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[(i, col)].abs().total_cmp(&m[(j, col)].abs()))
            .unwrap();
        m.swap_rows(col, piv);
        inv.swap_rows(col, piv);
        let d = m[(col, col)];
        for j in 0..n {
            m[(col, j)] /= d;
            inv[(col, j)] /= d;
        }
        for i in 0..n {
            if i != col {
                let f = m[(i, col)];
                if f != 0.0 {
                    for j in 0..n {
                        m[(i, j)] -= f * m[(col, j)];
                        inv[(i, j)] -= f * inv[(col, j)];
                    }
                }
            }
        }
    }
    inv
}

pub fn log_det_spd(a: &DMatrix<f64>) -> f64 {
    let l = cholesky_lower(a);
    2.0 * (0..a.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>()
}

/// Posterior `(mean, cov, log-likelihood)` of `N(mu, sigma)` over a flattened trajectory
/// after observing positions `z_k` at timesteps `t_k` with noise `s2 * I`.
///
/// Uses the partition formula on the joint of the state and the noisy observations:
/// `[x; z] ~ N([mu; H mu], [[S, S H^T], [H S, H S H^T + s2 I]])`.
pub fn partition_condition(
    mu: &DVector<f64>,
    sigma: &DMatrix<f64>,
    obs: &[(usize, [f64; 2])],
    s2: f64,
) -> (DVector<f64>, DMatrix<f64>, f64) {
    let n = mu.len();
    let m = 2 * obs.len();
    if m == 0 {
        return (mu.clone(), sigma.clone(), 0.0);
    }
    let mut joint_cov = DMatrix::zeros(n + m, n + m);
    let mut joint_mean = DVector::zeros(n + m);
    let mut z = DVector::zeros(m);
    let mut idx = Vec::with_capacity(m);
    for (k, (t, p)) in obs.iter().enumerate() {
        idx.push(2 * t);
        idx.push(2 * t + 1);
        z[2 * k] = p[0];
        z[2 * k + 1] = p[1];
    }
    joint_cov.view_mut((0, 0), (n, n)).copy_from(sigma);
    joint_mean.rows_mut(0, n).copy_from(mu);
    for (a, &ia) in idx.iter().enumerate() {
        joint_mean[n + a] = mu[ia];
        for i in 0..n {
            joint_cov[(i, n + a)] = sigma[(i, ia)];
            joint_cov[(n + a, i)] = sigma[(ia, i)];
        }
        for (b, &ib) in idx.iter().enumerate() {
            joint_cov[(n + a, n + b)] = sigma[(ia, ib)] + if a == b { s2 } else { 0.0 };
        }
    }
    let s_xx = joint_cov.view((0, 0), (n, n)).into_owned();
    let s_xz = joint_cov.view((0, n), (n, m)).into_owned();
    let s_zz = joint_cov.view((n, n), (m, m)).into_owned();
    let mu_z = joint_mean.rows(n, m).into_owned();
    let s_zz_inv = gauss_jordan_inverse(&s_zz);
    let innov = &z - &mu_z;
    let mean = mu + &s_xz * &s_zz_inv * &innov;
    let cov = &s_xx - &s_xz * &s_zz_inv * s_xz.transpose();
    let quad = innov.dot(&(&s_zz_inv * &innov));
    let ll = -0.5 * (quad + log_det_spd(&s_zz) + m as f64 * (2.0 * std::f64::consts::PI).ln());
    (mean, cov, ll)
}

/// Draws from `N(mu, sigma)` using the textbook Cholesky factor.
pub struct MvnSampler {
    mu: DVector<f64>,
    l: DMatrix<f64>,
}

impl MvnSampler {
    pub fn new(mu: &DVector<f64>, sigma: &DMatrix<f64>) -> Self {
        Self {
            mu: mu.clone(),
            l: cholesky_lower(sigma),
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        let e = DVector::from_fn(self.mu.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.mu + &self.l * e
    }
}

/// Gaussian-to-Gaussian KL divergence through explicit inverses.
pub fn gaussian_kl_direct(m0: &DVector<f64>, s0: &DMatrix<f64>, m1: &DVector<f64>, s1: &DMatrix<f64>) -> f64 {
    let k = m0.len() as f64;
    let inv1 = gauss_jordan_inverse(s1);
    let d = m1 - m0;
    0.5 * ((&inv1 * s0).trace() + d.dot(&(&inv1 * &d)) - k + log_det_spd(s1) - log_det_spd(s0))
}

/// Variational divergence between mixtures given as `(weight, mean, cov)` lists,
/// evaluated term by term without log-sum-exp.
pub fn variational_direct(
    f: &[(f64, DVector<f64>, DMatrix<f64>)],
    g: &[(f64, DVector<f64>, DMatrix<f64>)],
) -> f64 {
    let mut total = 0.0;
    for (wa, ma, sa) in f {
        if *wa == 0.0 {
            continue;
        }
        let num: f64 = f
            .iter()
            .map(|(w, m, s)| w * (-gaussian_kl_direct(ma, sa, m, s)).exp())
            .sum();
        let den: f64 = g
            .iter()
            .map(|(w, m, s)| w * (-gaussian_kl_direct(ma, sa, m, s)).exp())
            .sum();
        total += wa * (num / den).ln();
    }
    total
}

// ---------------------------------------------------------------------------
// Mixture builders.

pub fn component(word: &str, sub: usize, weight: f64, mean: DVector<f64>, cov: DMatrix<f64>) -> GmmComponent {
    GmmComponent {
        label: ComponentLabel {
            word: word.parse::<HWord>().unwrap(),
            sub_mode: sub,
        },
        weight,
        mean,
        cov,
    }
}

/// Random mixture over `t_len` timesteps with one component per word.
pub fn random_gmm<R: Rng>(rng: &mut R, words: &[&str], t_len: usize) -> HomotopicGmm {
    let raw: Vec<f64> = words.iter().map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    HomotopicGmm {
        t_len,
        components: words
            .iter()
            .zip(&raw)
            .map(|(w, r)| {
                component(
                    w,
                    1,
                    r / total,
                    random_vector(rng, 2 * t_len, 2.0),
                    random_spd(rng, 2 * t_len, 1.0),
                )
            })
            .collect(),
    }
}

/// Squared-exponential covariance over `t_len` timesteps for both coordinates, plus jitter.
pub fn se_trajectory_cov(t_len: usize, amplitude: f64, length_scale: f64, jitter: f64) -> DMatrix<f64> {
    let n = 2 * t_len;
    DMatrix::from_fn(n, n, |i, j| {
        if i % 2 != j % 2 {
            return 0.0;
        }
        let dt = (i / 2) as f64 - (j / 2) as f64;
        let k = amplitude * amplitude * (-0.5 * dt * dt / (length_scale * length_scale)).exp();
        if i == j {
            k + jitter
        } else {
            k
        }
    })
}

/// Straight-line mean trajectory from `a` to `b` over `t_len` steps, flattened.
pub fn line_mean(a: Point2<f64>, b: Point2<f64>, t_len: usize) -> DVector<f64> {
    let mut m = DVector::zeros(2 * t_len);
    for t in 0..t_len {
        let u = t as f64 / (t_len - 1) as f64;
        let p = a + (b - a) * u;
        m[2 * t] = p.x;
        m[2 * t + 1] = p.y;
    }
    m
}

/// True if segment `a -> b` crosses the ray segment (origin `o`, end `e`) left to right (+1),
/// right to left (-1), or not at all (0); plain floating-point test for sampling oracles.
pub fn crossing_sign(a: &Point2<f64>, b: &Point2<f64>, o: &Point2<f64>, e: &Point2<f64>) -> i32 {
    let d = b - a;
    let r = e - o;
    let denom = d.x * r.y - d.y * r.x;
    if denom == 0.0 {
        return 0;
    }
    let w = o - a;
    let s = (w.x * r.y - w.y * r.x) / denom;
    let u = (w.x * d.y - w.y * d.x) / denom;
    if !(0.0..1.0).contains(&s) || !(0.0..=1.0).contains(&u) {
        return 0;
    }
    if r.x * d.y - r.y * d.x > 0.0 {
        1
    } else {
        -1
    }
}
