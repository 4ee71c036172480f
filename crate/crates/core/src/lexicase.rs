//! Baseline lexicase and epsilon-lexicase selection events.
//!
//! One event shuffles the case order uniformly, then repeatedly keeps
//! only the candidates with best (or epsilon-close-to-best) performance
//! on the next case, returning early when a single candidate remains and
//! picking uniformly among the survivors otherwise.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::FitnessMatrix;
use crate::rng::RngSeed;

/// Per-case relaxation thresholds, same units as fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonVector {
    eps: Vec<f64>,
}

impl EpsilonVector {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        for (index, &e) in eps.iter().enumerate() {
            if !(e.is_finite() && e >= 0.0) {
                return Err(Error::InvalidEpsilon { index });
            }
        }
        Ok(Self { eps })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            eps: alloc::vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.eps
    }
}

/// One lexicase selection event; returns the selected individual's index.
pub fn select_one<R: Rng>(m: &FitnessMatrix, rng: &mut R) -> usize {
    select_with(m, None, rng)
}

/// One epsilon-lexicase selection event. Survivors on a case are the
/// candidates within `eps` of the best among the current candidates, so a
/// zero epsilon reduces exactly to [`select_one`].
pub fn epsilon_select_one<R: Rng>(
    m: &FitnessMatrix,
    eps: &EpsilonVector,
    rng: &mut R,
) -> Result<usize> {
    if eps.len() != m.num_cases() {
        return Err(Error::EpsilonLength {
            expected: m.num_cases(),
            got: eps.len(),
        });
    }
    Ok(select_with(m, Some(eps.as_slice()), rng))
}

pub(crate) fn select_with<R: Rng>(m: &FitnessMatrix, eps: Option<&[f64]>, rng: &mut R) -> usize {
    let mut case_order: Vec<usize> = (0..m.num_cases()).collect();
    case_order.shuffle(rng);

    let mut pool: Vec<usize> = (0..m.pop_size()).collect();
    for &j in &case_order {
        if pool.len() == 1 {
            break;
        }
        let best = pool
            .iter()
            .map(|&i| m.value(i, j))
            .fold(f64::NEG_INFINITY, f64::max);
        let threshold = best - eps.map_or(0.0, |e| e[j]);
        pool.retain(|&i| m.value(i, j) >= threshold);
        if pool.len() == 1 {
            return pool[0];
        }
    }
    if pool.len() == 1 {
        pool[0]
    } else {
        pool[rng.gen_range(0..pool.len())]
    }
}

/// Median absolute deviation of each case's fitness over the population;
/// the standard dynamic epsilon for epsilon-lexicase. Even-length medians
/// use the midpoint of the two central order statistics.
pub fn mad_epsilon(m: &FitnessMatrix) -> EpsilonVector {
    let mut eps = Vec::with_capacity(m.num_cases());
    let mut column = Vec::with_capacity(m.pop_size());
    for j in 0..m.num_cases() {
        column.clear();
        column.extend((0..m.pop_size()).map(|i| m.value(i, j)));
        column.sort_unstable_by(f64::total_cmp);
        let med = median_of_sorted(&column);
        let mut deviations: Vec<f64> = column.iter().map(|&v| libm::fabs(v - med)).collect();
        deviations.sort_unstable_by(f64::total_cmp);
        eps.push(median_of_sorted(&deviations));
    }
    EpsilonVector { eps }
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Runs `n_parents` independent selection events, one per derived random
/// stream (stream index = event index), so the result is deterministic
/// for a given seed and independent of evaluation order.
pub fn select_parents_repeated(
    m: &FitnessMatrix,
    n_parents: usize,
    eps: Option<&EpsilonVector>,
    seed: RngSeed,
) -> Result<Vec<usize>> {
    if n_parents == 0 {
        return Err(Error::ZeroParents);
    }
    if let Some(e) = eps {
        if e.len() != m.num_cases() {
            return Err(Error::EpsilonLength {
                expected: m.num_cases(),
                got: e.len(),
            });
        }
    }
    let eps = eps.map(EpsilonVector::as_slice);
    Ok((0..n_parents)
        .map(|event| select_with(m, eps, &mut seed.stream(event as u64)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Orientation;

    fn matrix(rows: &[&[f64]]) -> FitnessMatrix {
        FitnessMatrix::from_rows(rows, Orientation::Maximize).unwrap()
    }

    #[test]
    fn dominant_row_always_wins() {
        let m = matrix(&[&[1.0, 1.0], &[0.0, 0.0]]);
        for seed in 0..50 {
            assert_eq!(select_one(&m, &mut RngSeed(seed).stream(0)), 0);
        }
    }

    #[test]
    fn symmetric_matrix_splits_evenly() {
        // Exact enumeration gives 1/2 each; check the empirical frequency.
        let m = matrix(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let trials = 10_000u64;
        let seed = RngSeed(11);
        let picked_zero = (0..trials)
            .filter(|&t| select_one(&m, &mut seed.stream(t)) == 0)
            .count();
        let freq = picked_zero as f64 / trials as f64;
        assert!((freq - 0.5).abs() <= 0.05, "freq = {freq}");
    }

    #[test]
    fn identical_rows_select_uniformly() {
        let m = matrix(&[&[2.0, 2.0] as &[f64]; 4]);
        let trials = 8_000u64;
        let seed = RngSeed(5);
        let mut counts = [0usize; 4];
        for t in 0..trials {
            counts[select_one(&m, &mut seed.stream(t))] += 1;
        }
        for c in counts {
            let freq = c as f64 / trials as f64;
            assert!((freq - 0.25).abs() <= 0.05, "freq = {freq}");
        }
    }

    #[test]
    fn zero_eps_matches_plain_selection_seed_for_seed() {
        let m = matrix(&[&[0.3, 0.9, 0.4], &[0.5, 0.9, 0.1], &[0.3, 0.2, 0.4]]);
        let zeros = EpsilonVector::zeros(3);
        for seed in 0..200u64 {
            let a = select_one(&m, &mut RngSeed(seed).stream(0));
            let b = epsilon_select_one(&m, &zeros, &mut RngSeed(seed).stream(0)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn eps_widens_the_survivor_pool() {
        let m = matrix(&[&[1.0], &[0.95]]);
        let eps = EpsilonVector::new(vec![0.1]).unwrap();
        let trials = 4_000u64;
        let seed = RngSeed(17);
        let ones = (0..trials)
            .filter(|&t| epsilon_select_one(&m, &eps, &mut seed.stream(t)).unwrap() == 1)
            .count();
        let freq = ones as f64 / trials as f64;
        assert!((freq - 0.5).abs() <= 0.05, "freq = {freq}");
    }

    #[test]
    fn eps_narrow_enough_excludes_stragglers() {
        let m = matrix(&[&[1.0], &[0.80]]);
        let eps = EpsilonVector::new(vec![0.1]).unwrap();
        for seed in 0..100 {
            let picked =
                epsilon_select_one(&m, &eps, &mut RngSeed(seed).stream(0)).unwrap();
            assert_eq!(picked, 0);
        }
    }

    #[test]
    fn eps_length_mismatch_rejected() {
        let m = matrix(&[&[1.0, 0.0]]);
        let eps = EpsilonVector::new(vec![0.1]).unwrap();
        assert!(matches!(
            epsilon_select_one(&m, &eps, &mut RngSeed(0).stream(0)),
            Err(Error::EpsilonLength { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn mad_epsilon_examples() {
        let m = matrix(&[&[1.0], &[2.0], &[3.0]]);
        assert_eq!(mad_epsilon(&m).as_slice(), &[1.0]);

        let m = matrix(&[&[5.0], &[5.0], &[5.0], &[5.0]]);
        assert_eq!(mad_epsilon(&m).as_slice(), &[0.0]);

        let m = matrix(&[&[0.0], &[0.0], &[0.0], &[10.0]]);
        assert_eq!(mad_epsilon(&m).as_slice(), &[0.0]);
    }

    #[test]
    fn mad_epsilon_row_permutation_invariant() {
        let rows: [&[f64]; 5] = [
            &[0.1, 3.0],
            &[0.7, -1.0],
            &[0.4, 0.0],
            &[0.9, 2.5],
            &[0.2, 2.5],
        ];
        let m = matrix(&rows);
        let permuted = matrix(&[rows[3], rows[0], rows[4], rows[2], rows[1]]);
        assert_eq!(mad_epsilon(&m), mad_epsilon(&permuted));
    }

    #[test]
    fn repeated_selection_contracts() {
        let m = matrix(&[&[1.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(
            select_parents_repeated(&m, 0, None, RngSeed(1)),
            Err(Error::ZeroParents)
        ));
        assert_eq!(
            select_parents_repeated(&m, 5, None, RngSeed(1)).unwrap(),
            vec![0, 0, 0, 0, 0]
        );
        let a = select_parents_repeated(&m, 7, None, RngSeed(2)).unwrap();
        let b = select_parents_repeated(&m, 7, None, RngSeed(2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn epsilon_vector_rejects_bad_entries() {
        assert!(EpsilonVector::new(vec![0.1, -0.2]).is_err());
        assert!(EpsilonVector::new(vec![f64::NAN]).is_err());
    }
}
