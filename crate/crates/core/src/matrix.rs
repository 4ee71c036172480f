//! Fitness matrices and the preprocessing shared by all selection
//! operators: orientation normalization, column bests, elitism counts,
//! duplicate preselection, and case downsampling.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::lexicase::EpsilonVector;
use crate::rng::RngSeed;

/// Whether raw scores are rewards or errors. Internally fitness is always
/// maximized; error-based inputs are negated at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Maximize,
    Minimize,
}

/// P individuals by N cases, row-major, finite entries, higher is better.
#[derive(Debug, Clone, PartialEq)]
pub struct FitnessMatrix {
    values: Vec<f64>,
    pop_size: usize,
    num_cases: usize,
}

impl FitnessMatrix {
    /// Builds a matrix from per-individual fitness rows, negating every
    /// entry when `orientation` is [`Orientation::Minimize`].
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], orientation: Orientation) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let num_cases = rows[0].as_ref().len();
        if num_cases == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut values = Vec::with_capacity(rows.len() * num_cases);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != num_cases {
                return Err(Error::RaggedRow {
                    row: i,
                    expected: num_cases,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                let oriented = match orientation {
                    Orientation::Maximize => v,
                    Orientation::Minimize => -v,
                };
                // + 0.0 canonicalizes -0.0 so that bitwise row equality
                // coincides with numeric equality.
                values.push(oriented + 0.0);
            }
        }
        Ok(Self {
            values,
            pop_size: rows.len(),
            num_cases,
        })
    }

    pub fn pop_size(&self) -> usize {
        self.pop_size
    }

    pub fn num_cases(&self) -> usize {
        self.num_cases
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.num_cases..(i + 1) * self.num_cases]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.num_cases + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.num_cases)
    }

    /// New matrix containing only the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> FitnessMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.num_cases);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        FitnessMatrix {
            values,
            pop_size: indices.len(),
            num_cases: self.num_cases,
        }
    }

    /// New matrix containing only the columns in `subset`.
    pub fn select_cases(&self, subset: &CaseSubset) -> FitnessMatrix {
        let idx = subset.indices();
        let mut values = Vec::with_capacity(self.pop_size * idx.len());
        for row in self.rows() {
            values.extend(idx.iter().map(|&j| row[j]));
        }
        FitnessMatrix {
            values,
            pop_size: self.pop_size,
            num_cases: idx.len(),
        }
    }
}

/// Total order on rows via bit patterns; used for grouping and duplicate
/// detection. Entries are finite and zero-canonicalized, so bitwise
/// equality coincides with numeric equality.
pub(crate) fn row_bits_cmp(a: &[f64], b: &[f64]) -> core::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.to_bits().cmp(&y.to_bits()) {
            core::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    core::cmp::Ordering::Equal
}

/// Per-case column maxima: the global best fitness of each case over the
/// whole population.
pub fn best_per_case(m: &FitnessMatrix) -> Vec<f64> {
    let mut best = m.row(0).to_vec();
    for i in 1..m.pop_size() {
        for (b, &v) in best.iter_mut().zip(m.row(i)) {
            if v > *b {
                *b = v;
            }
        }
    }
    best
}

/// Number of cases on which each individual attains the column best,
/// optionally relaxed per case: a case counts when `f >= best - eps`.
///
/// `eps = None` is equivalent to an all-zero epsilon vector.
pub fn elitism_counts(
    m: &FitnessMatrix,
    best: &[f64],
    eps: Option<&EpsilonVector>,
) -> Result<Vec<usize>> {
    if best.len() != m.num_cases() {
        return Err(Error::LengthMismatch {
            left: best.len(),
            right: m.num_cases(),
        });
    }
    if let Some(e) = eps {
        if e.len() != m.num_cases() {
            return Err(Error::EpsilonLength {
                expected: m.num_cases(),
                got: e.len(),
            });
        }
    }
    Ok(elitism_counts_raw(m, best, eps.map(EpsilonVector::as_slice)))
}

pub(crate) fn elitism_counts_raw(
    m: &FitnessMatrix,
    best: &[f64],
    eps: Option<&[f64]>,
) -> Vec<usize> {
    let mut thresholds = best.to_vec();
    if let Some(e) = eps {
        for (t, &ej) in thresholds.iter_mut().zip(e) {
            *t -= ej;
        }
    }
    m.rows()
        .map(|row| row.iter().zip(&thresholds).filter(|(v, t)| v >= t).count())
        .collect()
}

/// Preselection of duplicate behaviors: one representative per distinct
/// fitness vector, with the original indices that share it. Grouping uses
/// exact bitwise row equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DedupIndex {
    unique_rows: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl DedupIndex {
    /// Row indices of the representatives, in first-occurrence order.
    pub fn unique_rows(&self) -> &[usize] {
        &self.unique_rows
    }

    /// Original indices sharing the k-th representative's fitness vector.
    pub fn members(&self, k: usize) -> &[usize] {
        &self.members[k]
    }

    /// Number of distinct fitness vectors.
    pub fn len(&self) -> usize {
        self.unique_rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unique_rows.is_empty()
    }

    /// Matrix of the representative rows, in representative order.
    pub fn unique_matrix(&self, m: &FitnessMatrix) -> FitnessMatrix {
        m.select_rows(&self.unique_rows)
    }

    /// Spreads a per-representative probability vector back over the
    /// original population, splitting each representative's mass uniformly
    /// among its members.
    pub fn expand_uniform(&self, unique_probs: &[f64], pop_size: usize) -> Vec<f64> {
        debug_assert_eq!(unique_probs.len(), self.unique_rows.len());
        let mut probs = vec![0.0; pop_size];
        for (p, members) in unique_probs.iter().zip(&self.members) {
            let share = p / members.len() as f64;
            for &o in members {
                probs[o] = share;
            }
        }
        probs
    }
}

/// Groups individuals by exact fitness vector.
pub fn dedup(m: &FitnessMatrix) -> DedupIndex {
    let mut order: Vec<usize> = (0..m.pop_size()).collect();
    order.sort_unstable_by(|&a, &b| row_bits_cmp(m.row(a), m.row(b)).then(a.cmp(&b)));

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some(g) if row_bits_cmp(m.row(g[0]), m.row(i)) == core::cmp::Ordering::Equal => {
                g.push(i)
            }
            _ => groups.push(vec![i]),
        }
    }
    // First-occurrence order of the representatives.
    groups.sort_unstable_by_key(|g| g[0]);
    let unique_rows = groups.iter().map(|g| g[0]).collect();
    DedupIndex {
        unique_rows,
        members: groups,
    }
}

/// Non-empty, strictly increasing subset of case indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseSubset {
    indices: Vec<usize>,
}

impl CaseSubset {
    pub fn new(indices: Vec<usize>, num_cases: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidSubset {
                reason: "subset is empty",
            });
        }
        if !indices.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidSubset {
                reason: "indices must be strictly increasing",
            });
        }
        if *indices.last().unwrap() >= num_cases {
            return Err(Error::InvalidSubset {
                reason: "index out of range",
            });
        }
        Ok(Self { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Uniform sample of `ceil(rate * num_cases)` distinct case indices,
/// deterministic for a given seed.
pub fn downsample(num_cases: usize, rate: f64, seed: RngSeed) -> Result<CaseSubset> {
    downsample_with_rng(num_cases, rate, &mut seed.stream(0))
}

/// As [`downsample`], drawing from a caller-supplied generator.
pub fn downsample_with_rng<R: Rng>(num_cases: usize, rate: f64, rng: &mut R) -> Result<CaseSubset> {
    if num_cases == 0 {
        return Err(Error::EmptyMatrix);
    }
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidRate { rate });
    }
    // The 1e-9 nudge keeps exact multiples from rounding up on float error.
    let k = libm::ceil(rate * num_cases as f64 - 1e-9) as usize;
    let k = k.clamp(1, num_cases);
    let mut indices: Vec<usize> = rand::seq::index::sample(rng, num_cases, k).into_vec();
    indices.sort_unstable();
    Ok(CaseSubset { indices })
}
