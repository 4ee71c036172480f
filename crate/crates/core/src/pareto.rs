//! Dominance predicates and the Pareto set boundary search.
//!
//! An individual can be selected by lexicase selection only if it attains
//! the global best fitness on at least one case and no other individual
//! dominates it. The search sorts individuals by elitism count so each
//! survivor is compared only against individuals with equal or lower
//! counts, and removes dominated individuals from the working list as
//! soon as they are found.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lexicase::EpsilonVector;
use crate::matrix::{self, FitnessMatrix};

/// Indices of the Pareto set boundaries over a matrix of distinct rows,
/// together with the epsilon vector used (if any) for provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySet {
    indices: Vec<usize>,
    eps_used: Option<EpsilonVector>,
}

impl BoundarySet {
    /// Boundary indices in increasing order.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn eps_used(&self) -> Option<&EpsilonVector> {
        self.eps_used.as_ref()
    }
}

/// True when `f_a` is at least `f_b` on every case (zero count of cases
/// where `f_a < f_b`). Reflexive.
pub fn dominates(f_a: &[f64], f_b: &[f64]) -> Result<bool> {
    if f_a.len() != f_b.len() {
        return Err(Error::LengthMismatch {
            left: f_a.len(),
            right: f_b.len(),
        });
    }
    Ok(dominates_raw(f_a, f_b, None))
}

/// True when `f_a` exceeds `f_b` by at least `eps` on every case. A zero
/// epsilon reduces to [`dominates`].
pub fn eps_dominates(f_a: &[f64], f_b: &[f64], eps: &EpsilonVector) -> Result<bool> {
    if f_a.len() != f_b.len() {
        return Err(Error::LengthMismatch {
            left: f_a.len(),
            right: f_b.len(),
        });
    }
    if eps.len() != f_a.len() {
        return Err(Error::EpsilonLength {
            expected: f_a.len(),
            got: eps.len(),
        });
    }
    Ok(dominates_raw(f_a, f_b, Some(eps.as_slice())))
}

fn dominates_raw(f_a: &[f64], f_b: &[f64], eps: Option<&[f64]>) -> bool {
    match eps {
        None => f_a.iter().zip(f_b).all(|(a, b)| a >= b),
        Some(e) => f_a
            .iter()
            .zip(f_b)
            .zip(e)
            .all(|((a, b), ej)| a - ej >= *b),
    }
}

/// Finds the Pareto set boundaries of a matrix of pairwise-distinct rows:
/// exactly the individuals with at least one (epsilon-relaxed) elite case
/// that are not (epsilon-)dominated by any other individual.
///
/// Rows must be distinct; run [`matrix::dedup`] first. Duplicate rows are
/// rejected because two identical rows would eliminate each other.
pub fn find_boundaries(m: &FitnessMatrix, eps: Option<&EpsilonVector>) -> Result<BoundarySet> {
    Ok(find_boundaries_with_counts(m, eps)?.0)
}

/// As [`find_boundaries`], also returning the per-individual elitism
/// counts it computed (over all rows of `m`).
pub(crate) fn find_boundaries_with_counts(
    m: &FitnessMatrix,
    eps: Option<&EpsilonVector>,
) -> Result<(BoundarySet, Vec<usize>)> {
    if let Some(e) = eps {
        if e.len() != m.num_cases() {
            return Err(Error::EpsilonLength {
                expected: m.num_cases(),
                got: e.len(),
            });
        }
    }
    check_rows_distinct(m)?;
    let eps_slice = eps.map(EpsilonVector::as_slice);
    let (indices, counts) = boundaries_mixed(m, eps_slice, eps_slice);
    Ok((
        BoundarySet {
            indices,
            eps_used: eps.cloned(),
        },
        counts,
    ))
}

fn check_rows_distinct(m: &FitnessMatrix) -> Result<()> {
    let mut order: Vec<usize> = (0..m.pop_size()).collect();
    order.sort_unstable_by(|&a, &b| matrix::row_bits_cmp(m.row(a), m.row(b)).then(a.cmp(&b)));
    for w in order.windows(2) {
        if matrix::row_bits_cmp(m.row(w[0]), m.row(w[1])) == core::cmp::Ordering::Equal {
            return Err(Error::DuplicateRows {
                first: w[0],
                second: w[1],
            });
        }
    }
    Ok(())
}

/// Boundary search with separate relaxations for the elitism test and the
/// domination test. The public entry points pass the same vector to both;
/// keeping them apart lets tests pin down each effect on its own.
///
/// Returns the boundary indices (ascending) and the elitism counts.
fn boundaries_mixed(
    m: &FitnessMatrix,
    eps_elite: Option<&[f64]>,
    eps_dom: Option<&[f64]>,
) -> (Vec<usize>, Vec<usize>) {
    let best = matrix::best_per_case(m);
    let counts = matrix::elitism_counts_raw(m, &best, eps_elite);

    // Condition 1: at least one (relaxed) elite case. Dropping the rest up
    // front is safe: any dominator of an elite individual is itself elite
    // on those cases, so removals are never lost.
    let mut cand: Vec<usize> = (0..m.pop_size()).filter(|&i| counts[i] >= 1).collect();
    cand.sort_unstable_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));

    let mut alive = vec![true; cand.len()];
    for s in 0..cand.len() {
        if !alive[s] {
            // Dominated individuals are skipped as subjects: by
            // transitivity their victims fall to whoever removed them.
            continue;
        }
        let yi = cand[s];
        for (t, alive_t) in alive.iter_mut().enumerate() {
            if t == s || !*alive_t {
                continue;
            }
            let yk = cand[t];
            // Individuals with strictly higher elitism cannot be dominated
            // by this subject.
            if counts[yk] <= counts[yi] && dominates_raw(m.row(yi), m.row(yk), eps_dom) {
                *alive_t = false;
            }
        }
    }

    let mut indices: Vec<usize> = cand
        .iter()
        .zip(&alive)
        .filter_map(|(&i, &a)| a.then_some(i))
        .collect();
    indices.sort_unstable();
    (indices, counts)
}
