//! Regression datasets with an explicit train/test split.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::RngSeed;

/// S samples by F features plus one target column, partitioned into
/// non-empty, disjoint train and test sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    num_features: usize,
    targets: Vec<f64>,
    train: Vec<usize>,
    test: Vec<usize>,
}

impl Dataset {
    pub fn new<R: AsRef<[f64]>>(
        features: &[R],
        targets: Vec<f64>,
        train: Vec<usize>,
        test: Vec<usize>,
    ) -> Result<Self> {
        let s = features.len();
        if s < 2 {
            return Err(Error::InvalidDataset {
                reason: "need at least two samples",
            });
        }
        if targets.len() != s {
            return Err(Error::InvalidDataset {
                reason: "targets and features disagree on sample count",
            });
        }
        let num_features = features[0].as_ref().len();
        let mut flat = Vec::with_capacity(s * num_features);
        for row in features {
            let row = row.as_ref();
            if row.len() != num_features {
                return Err(Error::InvalidDataset {
                    reason: "ragged feature rows",
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset {
                    reason: "non-finite feature value",
                });
            }
            flat.extend_from_slice(row);
        }
        if targets.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset {
                reason: "non-finite target value",
            });
        }
        if train.is_empty() || test.is_empty() {
            return Err(Error::InvalidDataset {
                reason: "train and test must be non-empty",
            });
        }
        if train.iter().chain(&test).any(|&i| i >= s) {
            return Err(Error::InvalidDataset {
                reason: "split index out of range",
            });
        }
        if train.iter().any(|i| test.contains(i)) {
            return Err(Error::InvalidDataset {
                reason: "train and test overlap",
            });
        }
        Ok(Self {
            features: flat,
            num_features,
            targets,
            train,
            test,
        })
    }

    /// Seeded shuffle split; `train_fraction` of the samples (at least
    /// one, at most S-1) go to the train set.
    pub fn split_random<R: AsRef<[f64]>>(
        features: &[R],
        targets: Vec<f64>,
        train_fraction: f64,
        seed: RngSeed,
    ) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidDataset {
                reason: "train fraction outside (0, 1)",
            });
        }
        let s = features.len();
        if s < 2 {
            return Err(Error::InvalidDataset {
                reason: "need at least two samples",
            });
        }
        let mut order: Vec<usize> = (0..s).collect();
        order.shuffle(&mut seed.stream(0));
        let n_train = ((train_fraction * s as f64) as usize).clamp(1, s - 1);
        let mut train = order[..n_train].to_vec();
        let mut test = order[n_train..].to_vec();
        train.sort_unstable();
        test.sort_unstable();
        Self::new(features, targets, train, test)
    }

    pub fn num_samples(&self) -> usize {
        self.targets.len()
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn feature_row(&self, sample: usize) -> &[f64] {
        &self.features[sample * self.num_features..(sample + 1) * self.num_features]
    }

    pub fn target(&self, sample: usize) -> f64 {
        self.targets[sample]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn train_indices(&self) -> &[usize] {
        &self.train
    }

    pub fn test_indices(&self) -> &[usize] {
        &self.test
    }

    pub fn train_targets(&self) -> Vec<f64> {
        self.train.iter().map(|&i| self.targets[i]).collect()
    }
}
