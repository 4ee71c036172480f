//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("row {row} has {got} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("non-finite fitness value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("epsilon vector has {got} entries, expected {expected}")]
    EpsilonLength { expected: usize, got: usize },
    #[error("epsilon entry {index} must be finite and non-negative")]
    InvalidEpsilon { index: usize },
    #[error("downsample rate {rate} outside (0, 1]")]
    InvalidRate { rate: f64 },
    #[error("case index {case} out of range for {num_cases} cases")]
    CaseOutOfRange { case: usize, num_cases: usize },
    #[error("case subset is invalid: {reason}")]
    InvalidSubset { reason: &'static str },
    #[error("rows {first} and {second} have identical fitness; run dedup before the boundary search")]
    DuplicateRows { first: usize, second: usize },
    #[error("vector lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("alpha must be finite and non-negative, got {alpha}")]
    InvalidAlpha { alpha: f64 },
    #[error("no training case contributes probability mass")]
    NoContributingCases,
    #[error("number of parents must be at least 1")]
    ZeroParents,
    #[error("number of trials must be at least 1")]
    ZeroTrials,
    #[error("matrix {pop}x{cases} exceeds oracle capacity {max_pop}x{max_cases}")]
    OracleCapacity {
        pop: usize,
        cases: usize,
        max_pop: usize,
        max_cases: usize,
    },
    #[error("reference selection is empty")]
    EmptyReference,
    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("targets are constant; coefficient of determination undefined")]
    ConstantTargets,
    #[error("invalid dataset: {reason}")]
    InvalidDataset { reason: &'static str },
    #[error("invalid expression tree: {reason}")]
    InvalidTree { reason: &'static str },
    #[error("invalid evolution config: {reason}")]
    InvalidConfig { reason: &'static str },
}
