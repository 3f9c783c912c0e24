use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DataError, Dataset};

/// Row indices of a cohort-stratified split.
///
/// Within each cohort level, `floor(frac * n_cohort)` rows chosen by a seeded
/// shuffle go to train, the rest to test. Both lists come back in ascending
/// row order.
pub fn split_indices(
    d: &Dataset,
    train_frac: &BTreeMap<String, f64>,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), DataError> {
    let col = d.cohort_column().ok_or(DataError::NoCohortColumn)?;
    let var = d.schema().var(col);
    for &f in train_frac.values() {
        if !(0.0..=1.0).contains(&f) {
            return Err(DataError::InvalidFraction(f));
        }
    }
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); var.cardinality()];
    for (r, cell) in d.column_cells(col).enumerate() {
        let l = cell.ok_or_else(|| DataError::Invalid(format!("row {}: cohort is missing", r + 1)))?;
        by_level[l].push(r);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (l, mut rows) in by_level.into_iter().enumerate() {
        if rows.is_empty() {
            continue;
        }
        let level = &var.levels[l];
        let frac = *train_frac
            .get(level)
            .ok_or_else(|| DataError::MissingFraction(level.clone()))?;
        let k = (frac * rows.len() as f64).floor() as usize;
        rows.shuffle(&mut rng);
        train.extend_from_slice(&rows[..k]);
        test.extend_from_slice(&rows[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split_train_test(
    d: &Dataset,
    train_frac: &BTreeMap<String, f64>,
    seed: u64,
) -> Result<(Dataset, Dataset), DataError> {
    let (train, test) = split_indices(d, train_frac, seed)?;
    Ok((d.select_rows(&train), d.select_rows(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Schema, Variable};

    fn cohorts(n_a: usize, n_b: usize) -> Dataset {
        let s = Schema::new(vec![Variable::new("cohort", ["PBC", "CBC"])]).unwrap();
        let col: Vec<Option<usize>> = (0..n_a).map(|_| Some(0)).chain((0..n_b).map(|_| Some(1))).collect();
        Dataset::new(s, vec![col]).unwrap().with_cohort("cohort").unwrap()
    }

    fn fracs(a: f64, b: f64) -> BTreeMap<String, f64> {
        BTreeMap::from([("PBC".to_string(), a), ("CBC".to_string(), b)])
    }

    #[test]
    fn full_fraction_leaves_test_empty() {
        let (tr, te) = split_train_test(&cohorts(10, 5), &fracs(1.0, 1.0), 3).unwrap();
        assert_eq!(tr.n_rows(), 15);
        assert_eq!(te.n_rows(), 0);
    }

    #[test]
    fn clinical_cohort_only_in_training() {
        let d = cohorts(1500, 340);
        let (tr, te) = split_train_test(&d, &fracs(0.667, 1.0), 11).unwrap();
        assert!(te.column_cells(0).all(|c| c == Some(0)));
        assert_eq!(te.n_rows(), 1500 - 1000);
        assert_eq!(tr.n_rows(), 1000 + 340);
    }

    #[test]
    fn requires_cohort_and_fractions() {
        let s = Schema::new(vec![Variable::new("cohort", ["PBC", "CBC"])]).unwrap();
        let d = Dataset::new(s, vec![vec![Some(0)]]).unwrap();
        assert!(matches!(split_indices(&d, &fracs(0.5, 0.5), 0), Err(DataError::NoCohortColumn)));
        let d = cohorts(3, 3);
        let only_a = BTreeMap::from([("PBC".to_string(), 0.5)]);
        assert!(matches!(split_indices(&d, &only_a, 0), Err(DataError::MissingFraction(_))));
        assert!(matches!(split_indices(&d, &fracs(1.5, 0.0), 0), Err(DataError::InvalidFraction(_))));
    }

    #[test]
    fn deterministic_per_seed() {
        let d = cohorts(50, 20);
        let a = split_indices(&d, &fracs(0.3, 0.6), 9).unwrap();
        let b = split_indices(&d, &fracs(0.3, 0.6), 9).unwrap();
        assert_eq!(a, b);
        let c = split_indices(&d, &fracs(0.3, 0.6), 10).unwrap();
        assert_ne!(a, c);
    }
}
