//! Seeded k-means with k-means++ seeding and restarts.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MAX_ITERS: usize = 100;

/// Cluster assignment of each point, best of `restarts` runs by inertia.
///
/// Clusters are renumbered by first appearance so the labeling is canonical.
pub fn kmeans(points: &[DVector<f64>], k: usize, restarts: usize, seed: u64) -> Vec<usize> {
    assert!(k >= 1 && points.len() >= k, "need at least k points");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..restarts.max(1) {
        let (inertia, assign) = lloyd(points, k, &mut rng);
        if best.as_ref().is_none_or(|(b, _)| inertia < *b) {
            best = Some((inertia, assign));
        }
    }
    canonical(best.unwrap().1, k)
}

fn canonical(assign: Vec<usize>, k: usize) -> Vec<usize> {
    let mut map = vec![usize::MAX; k];
    let mut next = 0;
    assign
        .into_iter()
        .map(|a| {
            if map[a] == usize::MAX {
                map[a] = next;
                next += 1;
            }
            map[a]
        })
        .collect()
}

fn dist2(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm_squared()
}

fn plus_plus<R: Rng>(points: &[DVector<f64>], k: usize, rng: &mut R) -> Vec<DVector<f64>> {
    let mut centers = vec![points[rng.random_range(0..points.len())].clone()];
    while centers.len() < k {
        let d: Vec<f64> = points
            .iter()
            .map(|p| centers.iter().map(|c| dist2(p, c)).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = d.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut idx = d.len() - 1;
            for (i, di) in d.iter().enumerate() {
                if u < *di {
                    idx = i;
                    break;
                }
                u -= di;
            }
            idx
        } else {
            rng.random_range(0..points.len())
        };
        centers.push(points[pick].clone());
    }
    centers
}

fn lloyd<R: Rng>(points: &[DVector<f64>], k: usize, rng: &mut R) -> (f64, Vec<usize>) {
    let mut centers = plus_plus(points, k, rng);
    let mut assign = vec![usize::MAX; points.len()];
    for _ in 0..MAX_ITERS {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let mut best = 0;
            let mut bd = f64::INFINITY;
            for (j, c) in centers.iter().enumerate() {
                let d = dist2(p, c);
                if d < bd {
                    bd = d;
                    best = j;
                }
            }
            if assign[i] != best {
                assign[i] = best;
                changed = true;
            }
        }
        // An empty cluster takes over the point farthest from its center.
        for j in 0..k {
            if !assign.contains(&j) {
                let far = (0..points.len())
                    .max_by(|&a, &b| {
                        dist2(&points[a], &centers[assign[a]])
                            .total_cmp(&dist2(&points[b], &centers[assign[b]]))
                    })
                    .unwrap();
                assign[far] = j;
                changed = true;
            }
        }
        for (j, c) in centers.iter_mut().enumerate() {
            let members: Vec<&DVector<f64>> = points
                .iter()
                .zip(&assign)
                .filter(|(_, &a)| a == j)
                .map(|(p, _)| p)
                .collect();
            let mut sum = DVector::zeros(points[0].len());
            for m in &members {
                sum += *m;
            }
            *c = sum / members.len() as f64;
        }
        if !changed {
            break;
        }
    }
    let inertia = points
        .iter()
        .zip(&assign)
        .map(|(p, &a)| dist2(p, &centers[a]))
        .sum();
    (inertia, assign)
}
