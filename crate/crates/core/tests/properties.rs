//! Cross-module invariants: the support theorem at small scale, the
//! statistical agreement between selection events and the exact oracle,
//! and distribution-shape properties under the alpha manipulation.

use plexi_core::gp;
use plexi_core::matrix::{self, FitnessMatrix, Orientation};
use plexi_core::oracle;
use plexi_core::pareto;
use plexi_core::plexicase;
use plexi_core::{lexicase, EpsilonVector, RngSeed};
use proptest::prelude::*;
use rand::Rng as _;

fn matrix_strategy(
    max_pop: usize,
    max_cases: usize,
    binary: bool,
) -> impl Strategy<Value = FitnessMatrix> {
    (1..=max_pop, 1..=max_cases)
        .prop_flat_map(move |(p, n)| {
            let cell = if binary {
                prop_oneof![Just(0.0f64), Just(1.0f64)].boxed()
            } else {
                (0.0f64..1.0).boxed()
            };
            proptest::collection::vec(proptest::collection::vec(cell, n), p)
        })
        .prop_map(|rows| FitnessMatrix::from_rows(&rows, Orientation::Maximize).unwrap())
}

/// Boundary indices of the deduplicated matrix, expanded back over the
/// duplicate members.
fn expanded_boundary_support(m: &FitnessMatrix) -> Vec<usize> {
    let dd = matrix::dedup(m);
    let unique = dd.unique_matrix(m);
    let boundaries = pareto::find_boundaries(&unique, None).unwrap();
    let mut support: Vec<usize> = boundaries
        .indices()
        .iter()
        .flat_map(|&u| dd.members(u).iter().copied())
        .collect();
    support.sort_unstable();
    support
}

proptest! {
    #[test]
    fn support_theorem_binary(m in matrix_strategy(10, 7, true)) {
        let expected = expanded_boundary_support(&m);
        let dd = matrix::dedup(&m);
        let d = plexicase::distribution(&m, 1.0, None, &dd).unwrap();
        prop_assert_eq!(d.support(), expected.as_slice());
        let oracle = oracle::exact_lexicase_probabilities(&m).unwrap();
        prop_assert_eq!(oracle.support(), expected);
    }

    #[test]
    fn support_theorem_continuous(m in matrix_strategy(10, 7, false)) {
        let expected = expanded_boundary_support(&m);
        let dd = matrix::dedup(&m);
        let d = plexicase::distribution(&m, 1.0, None, &dd).unwrap();
        prop_assert_eq!(d.support(), expected.as_slice());
        let oracle = oracle::exact_lexicase_probabilities(&m).unwrap();
        prop_assert_eq!(oracle.support(), expected);
    }

    #[test]
    fn distribution_normalizes_for_all_alpha(m in matrix_strategy(12, 6, true)) {
        let dd = matrix::dedup(&m);
        for alpha in [0.0, 0.5, 1.0, 2.0, 10.0] {
            let d = plexicase::distribution(&m, alpha, None, &dd).unwrap();
            let sum: f64 = d.probs().iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9, "alpha {}: sum {}", alpha, sum);
            prop_assert!(d.probs().iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn manipulate_shapes_the_maximum(
        raw in proptest::collection::vec(0.0f64..1.0, 2..12),
        zero_mask in proptest::collection::vec(proptest::bool::weighted(0.25), 2..12),
    ) {
        let mut weights: Vec<f64> = raw
            .iter()
            .zip(zero_mask.iter().chain(std::iter::repeat(&false)))
            .map(|(&w, &z)| if z { 0.0 } else { w + 1e-3 })
            .collect();
        if weights.iter().all(|&w| w == 0.0) {
            weights[0] = 1.0;
        }
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let max_before = probs.iter().cloned().fold(0.0, f64::max);

        for alpha in [0.0, 0.5, 1.0, 2.0, 10.0] {
            let shaped = plexicase::manipulate(&probs, alpha).unwrap();
            // Zeros are preserved exactly.
            for (before, after) in probs.iter().zip(&shaped) {
                if *before == 0.0 {
                    prop_assert_eq!(*after, 0.0);
                }
            }
            let max_after = shaped.iter().cloned().fold(0.0, f64::max);
            if alpha >= 1.0 {
                prop_assert!(max_after >= max_before - 1e-12);
            } else {
                prop_assert!(max_after <= max_before + 1e-12);
            }
        }
    }

    #[test]
    fn dedup_partitions_and_reconstructs(m in matrix_strategy(16, 4, true)) {
        let dd = matrix::dedup(&m);
        let mut seen = vec![false; m.pop_size()];
        for k in 0..dd.len() {
            for &o in dd.members(k) {
                prop_assert!(!seen[o]);
                seen[o] = true;
                prop_assert_eq!(m.row(o), m.row(dd.unique_rows()[k]));
            }
        }
        prop_assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn downsample_size_is_exact(n in 1usize..200, rate in 0.01f64..=1.0, seed in any::<u64>()) {
        let subset = matrix::downsample(n, rate, RngSeed(seed)).unwrap();
        let expected = ((rate * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
        prop_assert_eq!(subset.len(), expected);
        prop_assert!(subset.indices().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(subset.indices().iter().all(|&j| j < n));
    }

    #[test]
    fn mad_epsilon_is_row_permutation_invariant(m in matrix_strategy(9, 5, false)) {
        let reversed: Vec<usize> = (0..m.pop_size()).rev().collect();
        let rm = m.select_rows(&reversed);
        prop_assert_eq!(lexicase::mad_epsilon(&m), lexicase::mad_epsilon(&rm));
    }

    #[test]
    fn r_squared_is_at_most_one(
        preds in proptest::collection::vec(-5.0f64..5.0, 3..20),
        noise in proptest::collection::vec(-5.0f64..5.0, 3..20),
    ) {
        let len = preds.len().min(noise.len());
        let targets: Vec<f64> = noise[..len].iter().enumerate().map(|(i, v)| v + i as f64).collect();
        let r2 = gp::r_squared(&preds[..len], &targets).unwrap();
        prop_assert!(r2 <= 1.0);
    }
}

/// Empirical frequencies of repeated selection events converge to the
/// exact distribution within three Hoeffding radii.
#[test]
fn selection_frequencies_match_the_oracle() {
    let fixtures: Vec<FitnessMatrix> = vec![
        FitnessMatrix::from_rows(
            &[[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 0.0]],
            Orientation::Maximize,
        )
        .unwrap(),
        FitnessMatrix::from_rows(
            &[
                [1.0, 1.0, 1.0, 0.0],
                [1.0, 0.0, 0.0, 1.0],
                [0.0, 1.0, 0.0, 1.0],
            ],
            Orientation::Maximize,
        )
        .unwrap(),
        FitnessMatrix::from_rows(
            &[
                [0.1, 0.9, 0.4],
                [0.9, 0.1, 0.4],
                [0.5, 0.5, 0.5],
                [0.9, 0.9, 0.1],
            ],
            Orientation::Maximize,
        )
        .unwrap(),
    ];
    let trials = 20_000u64;
    for (fx, m) in fixtures.iter().enumerate() {
        let exact = oracle::exact_lexicase_probabilities(m).unwrap();
        let seed = RngSeed(1000 + fx as u64);
        let mut counts = vec![0u64; m.pop_size()];
        for t in 0..trials {
            counts[lexicase::select_one(m, &mut seed.stream(t))] += 1;
        }
        let bound = 3.0
            * ((2.0 * m.pop_size() as f64 / 0.01).ln() / (2.0 * trials as f64)).sqrt();
        for (i, (&c, &p)) in counts.iter().zip(exact.probs()).enumerate() {
            let freq = c as f64 / trials as f64;
            assert!(
                (freq - p).abs() <= bound,
                "fixture {fx}, individual {i}: freq {freq} vs exact {p} (bound {bound})"
            );
        }
    }
}

/// The set of individuals that repeated events can return is exactly the
/// boundary set; exercised over every case ordering via the oracle.
#[test]
fn lexicase_support_equals_boundaries() {
    for seed in 0..120u64 {
        let mut rng = RngSeed(seed).stream(9);
        let p = rng.gen_range(1..=10);
        let n = rng.gen_range(1..=7);
        let rows: Vec<Vec<f64>> = (0..p)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        if seed % 2 == 0 {
                            rng.gen_range(0..2) as f64
                        } else {
                            rng.gen::<f64>()
                        }
                    })
                    .collect()
            })
            .collect();
        let m = FitnessMatrix::from_rows(&rows, Orientation::Maximize).unwrap();
        let exact = oracle::exact_lexicase_probabilities(&m).unwrap();
        assert_eq!(exact.support(), expanded_boundary_support(&m), "seed {seed}");
    }
}

/// Epsilon-plexicase with zero epsilon is the plain distribution, and
/// epsilon-lexicase with zero epsilon tracks plain lexicase seed for
/// seed.
#[test]
fn zero_epsilon_reduction() {
    for seed in 0..60u64 {
        let mut rng = RngSeed(seed).stream(4);
        let p = rng.gen_range(2..=12);
        let n = rng.gen_range(1..=8);
        let rows: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let m = FitnessMatrix::from_rows(&rows, Orientation::Maximize).unwrap();
        let zeros = EpsilonVector::zeros(n);
        let dd = matrix::dedup(&m);
        let plain = plexicase::distribution(&m, 1.0, None, &dd).unwrap();
        let relaxed = plexicase::distribution(&m, 1.0, Some(&zeros), &dd).unwrap();
        assert_eq!(plain.probs(), relaxed.probs(), "seed {seed}");

        for event in 0..10u64 {
            let a = lexicase::select_one(&m, &mut RngSeed(seed).stream(event));
            let b =
                lexicase::epsilon_select_one(&m, &zeros, &mut RngSeed(seed).stream(event))
                    .unwrap();
            assert_eq!(a, b, "seed {seed}, event {event}");
        }
    }
}
