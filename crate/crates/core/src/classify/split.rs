use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::error::{Error, Result};

/// Patients grouped by majority class, each group shuffled with `seed`.
fn shuffled_groups(data: &Dataset, seed: u64) -> Vec<Vec<Vec<usize>>> {
    let mut groups: Vec<Vec<Vec<usize>>> = vec![Vec::new(); data.n_classes()];
    for (_, (class, rows)) in data.patients() {
        groups[class].push(rows);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for g in &mut groups {
        g.shuffle(&mut rng);
    }
    groups
}

/// Splits by patient, stratified on each patient's majority class. Each class
/// with patients sends `round(test_fraction * patients)` of them to the test
/// side, at least one and leaving at least one for training.
pub fn split_train_test(
    data: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Parameter(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, group) in shuffled_groups(data, seed).into_iter().enumerate() {
        if group.is_empty() {
            continue;
        }
        if group.len() < 2 {
            return Err(Error::Stratification(format!(
                "class {:?} has {} patient(s); at least 2 are needed to split",
                data.labels()[class],
                group.len()
            )));
        }
        let n_test =
            ((test_fraction * group.len() as f64).round() as usize).clamp(1, group.len() - 1);
        for (i, rows) in group.into_iter().enumerate() {
            if i < n_test {
                test.extend(rows);
            } else {
                train.extend(rows);
            }
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((data.subset(&train), data.subset(&test)))
}

/// Row indices of each fold. Patients of each class are dealt round-robin,
/// continuing the rotation across classes so fold sizes stay balanced.
pub fn stratified_folds(data: &Dataset, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::Parameter("need at least 2 folds".into()));
    }
    let mut out = vec![Vec::new(); folds];
    let mut next = 0;
    for (class, group) in shuffled_groups(data, seed).into_iter().enumerate() {
        if group.is_empty() {
            continue;
        }
        if group.len() < folds {
            return Err(Error::Stratification(format!(
                "class {:?} has {} patient(s), fewer than {folds} folds",
                data.labels()[class],
                group.len()
            )));
        }
        for rows in group {
            out[next % folds].extend(rows);
            next += 1;
        }
    }
    for f in &mut out {
        f.sort_unstable();
    }
    Ok(out)
}
