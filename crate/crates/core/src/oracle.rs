//! Ground-truth lexicase selection probabilities.
//!
//! Computing the exact distribution is NP-hard in general, so the
//! exhaustive recursion only accepts small matrices; beyond that,
//! Monte-Carlo estimation over repeated selection events stands in.
//! Overlap ratios and total variation quantify how closely another
//! operator tracks the lexicase distribution.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lexicase;
use crate::matrix::FitnessMatrix;
use crate::rng::RngSeed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    ExhaustiveRecursion,
    MonteCarlo,
}

/// Distribution of lexicase selection outcomes, either exact or
/// estimated.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    probs: Vec<f64>,
    method: OracleMethod,
    trials: Option<u64>,
}

impl ExactDistribution {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn method(&self) -> OracleMethod {
        self.method
    }

    pub fn trials(&self) -> Option<u64> {
        self.trials
    }

    /// Indices with positive probability, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.probs
            .iter()
            .enumerate()
            .filter_map(|(i, &p)| (p > 0.0).then_some(i))
            .collect()
    }
}

/// Size guard for the exhaustive recursion. Survivor sets are held in a
/// `u64` and case sets in a `u32`, which also caps the configurable
/// limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_pop: usize,
    pub max_cases: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_pop: 64,
            max_cases: 10,
        }
    }
}

/// Exact probability of each individual being selected by one lexicase
/// selection event, under uniform random case orderings and uniform
/// terminal tie-breaking. Memoized recursion over (survivor set,
/// remaining case set) states; rejects matrices beyond the default
/// [`OracleLimits`].
pub fn exact_lexicase_probabilities(m: &FitnessMatrix) -> Result<ExactDistribution> {
    exact_lexicase_probabilities_with_limits(m, OracleLimits::default())
}

/// As [`exact_lexicase_probabilities`] with caller-chosen capacity.
pub fn exact_lexicase_probabilities_with_limits(
    m: &FitnessMatrix,
    limits: OracleLimits,
) -> Result<ExactDistribution> {
    let max_pop = limits.max_pop.min(64);
    let max_cases = limits.max_cases.min(32);
    if m.pop_size() > max_pop || m.num_cases() > max_cases {
        return Err(Error::OracleCapacity {
            pop: m.pop_size(),
            cases: m.num_cases(),
            max_pop,
            max_cases,
        });
    }
    let mut solver = Solver {
        m,
        memo: BTreeMap::new(),
    };
    let all_survivors = full_mask(m.pop_size());
    let all_cases = if m.num_cases() == 32 {
        u32::MAX
    } else {
        (1u32 << m.num_cases()) - 1
    };
    let probs = solver.solve(all_survivors, all_cases);
    Ok(ExactDistribution {
        probs,
        method: OracleMethod::ExhaustiveRecursion,
        trials: None,
    })
}

fn full_mask(p: usize) -> u64 {
    if p == 64 {
        u64::MAX
    } else {
        (1u64 << p) - 1
    }
}

struct Solver<'a> {
    m: &'a FitnessMatrix,
    memo: BTreeMap<(u64, u32), Vec<f64>>,
}

impl Solver<'_> {
    fn solve(&mut self, survivors: u64, cases: u32) -> Vec<f64> {
        let p = self.m.pop_size();
        if survivors.count_ones() == 1 || cases == 0 {
            return uniform_over(survivors, p);
        }
        if let Some(v) = self.memo.get(&(survivors, cases)) {
            return v.clone();
        }
        let mut acc = vec![0.0; p];
        let branches = cases.count_ones() as f64;
        let mut rest = cases;
        while rest != 0 {
            let j = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let filtered = self.filter(survivors, j);
            let sub = self.solve(filtered, cases & !(1 << j));
            for (a, s) in acc.iter_mut().zip(&sub) {
                *a += s;
            }
        }
        for a in &mut acc {
            *a /= branches;
        }
        self.memo.insert((survivors, cases), acc.clone());
        acc
    }

    /// Survivors with exactly best performance on `case` among the
    /// current survivors.
    fn filter(&self, survivors: u64, case: usize) -> u64 {
        let mut best = f64::NEG_INFINITY;
        let mut rest = survivors;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let v = self.m.value(i, case);
            if v > best {
                best = v;
            }
        }
        let mut kept = 0u64;
        let mut rest = survivors;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if self.m.value(i, case) == best {
                kept |= 1 << i;
            }
        }
        kept
    }
}

fn uniform_over(survivors: u64, p: usize) -> Vec<f64> {
    let share = 1.0 / survivors.count_ones() as f64;
    let mut probs = vec![0.0; p];
    let mut rest = survivors;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        probs[i] = share;
    }
    probs
}

/// Empirical selection frequencies over independent selection events,
/// one derived stream per trial. Deterministic for a given seed.
pub fn monte_carlo_lexicase(
    m: &FitnessMatrix,
    trials: u64,
    seed: RngSeed,
) -> Result<ExactDistribution> {
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let mut counts = vec![0u64; m.pop_size()];
    for t in 0..trials {
        counts[lexicase::select_one(m, &mut seed.stream(t))] += 1;
    }
    let probs = counts.into_iter().map(|c| c as f64 / trials as f64).collect();
    Ok(ExactDistribution {
        probs,
        method: OracleMethod::MonteCarlo,
        trials: Some(trials),
    })
}

/// Overlap of two selected-parent multisets relative to the reference
/// `selected_b` (the lexicase side): `(all-individuals ratio,
/// unique-individuals ratio)`.
pub fn overlap_ratio(selected_a: &[usize], selected_b: &[usize]) -> Result<(f64, f64)> {
    if selected_b.is_empty() {
        return Err(Error::EmptyReference);
    }
    if selected_a.is_empty() {
        return Ok((0.0, 0.0));
    }
    let mut count_a: BTreeMap<usize, u64> = BTreeMap::new();
    for &i in selected_a {
        *count_a.entry(i).or_insert(0) += 1;
    }
    let mut count_b: BTreeMap<usize, u64> = BTreeMap::new();
    for &i in selected_b {
        *count_b.entry(i).or_insert(0) += 1;
    }
    let multiset_overlap: u64 = count_b
        .iter()
        .map(|(i, &cb)| cb.min(count_a.get(i).copied().unwrap_or(0)))
        .sum();
    let unique_overlap = count_b.keys().filter(|i| count_a.contains_key(i)).count();
    Ok((
        multiset_overlap as f64 / selected_b.len() as f64,
        unique_overlap as f64 / count_b.len() as f64,
    ))
}

/// Total variation distance between two distributions of equal length.
pub fn total_variation(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    for dist in [p, q] {
        let sum: f64 = dist.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::NotNormalized { sum });
        }
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| libm::fabs(a - b)).sum::<f64>())
}
