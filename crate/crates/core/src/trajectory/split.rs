use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Dataset, TrajectoryError};

/// Seeded per-class split into disjoint train and test sets of exact sizes.
///
/// Classes are visited in word order; one generator is shared across classes.
pub fn split(
    dataset: &Dataset,
    train_per_class: usize,
    test_per_class: usize,
    seed: u64,
) -> Result<(Dataset, Dataset), TrajectoryError> {
    let need = train_per_class + test_per_class;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train_t, mut train_h) = (Vec::new(), Vec::new());
    let (mut test_t, mut test_h) = (Vec::new(), Vec::new());
    for class in dataset.classes().keys() {
        let mut members: Vec<usize> = dataset
            .signatures()
            .iter()
            .enumerate()
            .filter(|(_, h)| *h == class)
            .map(|(i, _)| i)
            .collect();
        if members.len() < need {
            return Err(TrajectoryError::InsufficientClassMembers {
                class: class.clone(),
                have: members.len(),
                need,
            });
        }
        members.shuffle(&mut rng);
        for (k, &i) in members.iter().take(need).enumerate() {
            let t = dataset.trajectories()[i].clone();
            if k < train_per_class {
                train_t.push(t);
                train_h.push(class.clone());
            } else {
                test_t.push(t);
                test_h.push(class.clone());
            }
        }
    }
    Ok((
        Dataset::with_signatures(train_t, train_h),
        Dataset::with_signatures(test_t, test_h),
    ))
}
