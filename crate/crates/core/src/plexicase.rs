//! Probabilistic lexicase selection.
//!
//! Rather than running one selection event per parent, the operator
//! assigns each Pareto set boundary a selection probability — per case,
//! elite individuals are weighted by their total elitism count, and the
//! per-case distributions are averaged — then samples every parent from
//! the resulting distribution in one shot. An exponent `alpha` reshapes
//! the distribution between uniform-over-support (`alpha = 0`) and
//! sharply peaked (large `alpha`) without ever giving mass to an
//! individual outside the boundaries.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::lexicase::EpsilonVector;
use crate::matrix::{self, DedupIndex, FitnessMatrix};
use crate::pareto::{self, BoundarySet};

const SUM_TOLERANCE: f64 = 1e-9;

/// Selection probability per original individual. Probabilities are
/// non-negative, sum to one, and are zero exactly outside the support.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionDistribution {
    probs: Vec<f64>,
    support: Vec<usize>,
    alpha: f64,
}

impl SelectionDistribution {
    /// Wraps a raw probability vector, validating non-negativity and
    /// normalization. The support is the set of positive entries.
    pub fn from_probs(probs: Vec<f64>, alpha: f64) -> Result<Self> {
        let mut sum = 0.0;
        for &p in &probs {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::NotNormalized { sum: f64::NAN });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        let support = probs
            .iter()
            .enumerate()
            .filter_map(|(i, &p)| (p > 0.0).then_some(i))
            .collect();
        Ok(Self {
            probs,
            support,
            alpha,
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Indices with positive probability, ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Per-case selection probabilities over the boundary members. A case can
/// be non-contributing only in the relaxed regime, when no boundary
/// member is elite on it; such cases carry a zero vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseDistribution {
    pub probs: Vec<f64>,
    pub contributing: bool,
}

/// Distribution of selecting each boundary member on one training case:
/// elite members weighted by their elitism count, normalized over the
/// boundary set. `elitism` holds the per-individual counts over all rows
/// of `m`; the epsilon recorded in `boundaries` relaxes the elite test.
pub fn case_distribution(
    m: &FitnessMatrix,
    boundaries: &BoundarySet,
    elitism: &[usize],
    case: usize,
) -> Result<CaseDistribution> {
    if case >= m.num_cases() {
        return Err(Error::CaseOutOfRange {
            case,
            num_cases: m.num_cases(),
        });
    }
    let best = (0..m.pop_size())
        .map(|i| m.value(i, case))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(case_distribution_inner(m, boundaries, elitism, case, best))
}

fn case_distribution_inner(
    m: &FitnessMatrix,
    boundaries: &BoundarySet,
    elitism: &[usize],
    case: usize,
    best: f64,
) -> CaseDistribution {
    let threshold = best - boundaries.eps_used().map_or(0.0, |e| e.as_slice()[case]);
    let mut probs: Vec<f64> = boundaries
        .indices()
        .iter()
        .map(|&i| {
            if m.value(i, case) >= threshold {
                elitism[i] as f64
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = probs.iter().sum();
    if total == 0.0 {
        return CaseDistribution {
            probs,
            contributing: false,
        };
    }
    for p in &mut probs {
        *p /= total;
    }
    CaseDistribution {
        probs,
        contributing: true,
    }
}

/// Averages the per-case distributions over the contributing cases.
pub fn aggregate_distribution(per_case: &[CaseDistribution]) -> Result<Vec<f64>> {
    let contributing = per_case.iter().filter(|c| c.contributing).count();
    if contributing == 0 {
        return Err(Error::NoContributingCases);
    }
    let len = per_case[0].probs.len();
    for c in per_case {
        if c.probs.len() != len {
            return Err(Error::LengthMismatch {
                left: len,
                right: c.probs.len(),
            });
        }
    }
    let mut out = vec![0.0; len];
    for c in per_case.iter().filter(|c| c.contributing) {
        for (o, p) in out.iter_mut().zip(&c.probs) {
            *o += p;
        }
    }
    for o in &mut out {
        *o /= contributing as f64;
    }
    Ok(out)
}

/// Reshapes a distribution by exponent: `p_i^alpha`, renormalized. Zeros
/// stay zero for every `alpha >= 0`, and `alpha = 0` is uniform over the
/// support. Large exponents are computed in log space so tiny
/// probabilities underflow to zero instead of producing NaN.
pub fn manipulate(probs: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidAlpha { alpha });
    }
    let mut sum = 0.0;
    for &p in probs {
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::NotNormalized { sum: f64::NAN });
        }
        sum += p;
    }
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::NotNormalized { sum });
    }

    if alpha == 1.0 {
        return Ok(probs.iter().map(|&p| p / sum).collect());
    }
    if alpha == 0.0 {
        let support = probs.iter().filter(|&&p| p > 0.0).count();
        let share = 1.0 / support as f64;
        return Ok(probs
            .iter()
            .map(|&p| if p > 0.0 { share } else { 0.0 })
            .collect());
    }

    let max_log = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| alpha * libm::log(p))
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = probs
        .iter()
        .map(|&p| {
            if p > 0.0 {
                libm::exp(alpha * libm::log(p) - max_log)
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Full probabilistic selection pipeline: deduplicate, find the Pareto
/// set boundaries, assign per-case probabilities and average them, apply
/// the `alpha` manipulation, then split each representative's mass
/// uniformly among its duplicate members.
pub fn distribution(
    m: &FitnessMatrix,
    alpha: f64,
    eps: Option<&EpsilonVector>,
    dedup: &DedupIndex,
) -> Result<SelectionDistribution> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidAlpha { alpha });
    }
    let unique = dedup.unique_matrix(m);
    let (boundaries, elitism) = pareto::find_boundaries_with_counts(&unique, eps)?;
    let best = matrix::best_per_case(&unique);
    let per_case: Vec<CaseDistribution> = (0..unique.num_cases())
        .map(|j| case_distribution_inner(&unique, &boundaries, &elitism, j, best[j]))
        .collect();
    let averaged = aggregate_distribution(&per_case)?;
    let shaped = manipulate(&averaged, alpha)?;

    // Map boundary-member probabilities back onto the unique rows, then
    // spread over duplicates.
    let mut unique_probs = vec![0.0; unique.pop_size()];
    for (&u, &p) in boundaries.indices().iter().zip(&shaped) {
        unique_probs[u] = p;
    }
    let probs = dedup.expand_uniform(&unique_probs, m.pop_size());
    SelectionDistribution::from_probs(probs, alpha)
}

/// Draws `n_parents` independent samples by inverse CDF over the support.
/// Only support members can ever be returned.
pub fn sample_parents<R: Rng>(
    d: &SelectionDistribution,
    n_parents: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut cumulative = Vec::with_capacity(d.support().len());
    let mut acc = 0.0;
    for &i in d.support() {
        acc += d.probs()[i];
        cumulative.push(acc);
    }
    let total = acc;
    (0..n_parents)
        .map(|_| {
            let u = rng.gen::<f64>() * total;
            let k = cumulative.partition_point(|&c| c <= u);
            d.support()[k.min(d.support().len() - 1)]
        })
        .collect()
}
