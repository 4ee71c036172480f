//! Generational loop wiring the selection operators to the expression
//! trees: evaluate, optionally downsample cases, select parents with the
//! configured operator, and vary by subtree crossover and mutation.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::data::Dataset;
use super::tree::{self, ExprTree};
use crate::error::{Error, Result};
use crate::lexicase;
use crate::matrix::{self, FitnessMatrix, Orientation};
use crate::plexicase;
use crate::rng::RngSeed;

/// Parent selection operator used inside [`evolve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectionMethod {
    Tournament { k: usize },
    Lexicase,
    EpsilonLexicase,
    Plexicase { alpha: f64 },
    EpsilonPlexicase { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub generations: usize,
    pub selection: SelectionMethod,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub max_depth: usize,
    pub downsample_rate: Option<f64>,
    /// Number of best-on-train individuals copied unchanged.
    pub elitism: usize,
    pub seed: RngSeed,
}

impl EvolutionConfig {
    /// Config with the stock rates: crossover 0.9, mutation 0.1, max
    /// depth 8, one elite.
    pub fn new(
        population_size: usize,
        generations: usize,
        selection: SelectionMethod,
        seed: RngSeed,
    ) -> Self {
        Self {
            population_size,
            generations,
            selection,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            max_depth: 8,
            downsample_rate: None,
            elitism: 1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::InvalidConfig {
                reason: "population size must be at least 2",
            });
        }
        for rate in [self.crossover_rate, self.mutation_rate] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::InvalidConfig {
                    reason: "rates must lie in [0, 1]",
                });
            }
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidConfig {
                reason: "max depth must be at least 1",
            });
        }
        if let Some(rate) = self.downsample_rate {
            if !(rate > 0.0 && rate <= 1.0) {
                return Err(Error::InvalidRate { rate });
            }
        }
        if self.elitism >= self.population_size {
            return Err(Error::InvalidConfig {
                reason: "elitism must leave room for offspring",
            });
        }
        if let SelectionMethod::Tournament { k } = self.selection {
            if k == 0 {
                return Err(Error::InvalidConfig {
                    reason: "tournament size must be at least 1",
                });
            }
        }
        if let SelectionMethod::Plexicase { alpha } | SelectionMethod::EpsilonPlexicase { alpha } =
            self.selection
        {
            if !(alpha.is_finite() && alpha >= 0.0) {
                return Err(Error::InvalidAlpha { alpha });
            }
        }
        Ok(())
    }
}

/// Per-generation record. `selection_ms` covers drawing the parents for
/// the next generation (zero on the final record and whenever the crate
/// is built without `std`); `eval_ms` covers fitness evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub unique_behaviors: usize,
    pub selection_ms: f64,
    pub eval_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOutcome {
    pub best: ExprTree,
    /// Mean per-case fitness (negated mean squared error) of `best` on
    /// the train split.
    pub best_fitness: f64,
    pub stats: Vec<GenerationStats>,
}

#[cfg(feature = "std")]
fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = std::time::Instant::now();
    let value = f();
    (value, start.elapsed().as_secs_f64() * 1e3)
}

#[cfg(not(feature = "std"))]
fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    (f(), 0.0)
}

/// Per-case fitness of a tree over the train split: negated squared
/// error, so higher is better and zero is perfect.
pub fn case_fitness(t: &ExprTree, data: &Dataset) -> Vec<f64> {
    data.train_indices()
        .iter()
        .map(|&s| {
            let err = data.target(s) - t.eval_row(data.feature_row(s));
            -(err * err)
        })
        .collect()
}

/// Predictions of a tree over every sample of the dataset.
pub fn evaluate(t: &ExprTree, data: &Dataset) -> Vec<f64> {
    (0..data.num_samples())
        .map(|s| t.eval_row(data.feature_row(s)))
        .collect()
}

/// Coefficient of determination: `1 - SS_res / SS_tot`. Equals 1 only
/// for a perfect fit; errors out on constant targets.
pub fn r_squared(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: targets.len(),
        });
    }
    if targets.len() < 2 {
        return Err(Error::InvalidDataset {
            reason: "need at least two samples",
        });
    }
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    let ss_tot: f64 = targets.iter().map(|y| (y - mean) * (y - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::ConstantTargets);
    }
    let ss_res: f64 = targets
        .iter()
        .zip(predictions)
        .map(|(y, yh)| (y - yh) * (y - yh))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Tournament selection over aggregate fitness: draws `k` individuals
/// uniformly with replacement and returns the one with the highest row
/// sum, ties broken by the lowest index.
pub fn tournament_select<R: Rng>(m: &FitnessMatrix, k: usize, rng: &mut R) -> usize {
    let sums: Vec<f64> = m.rows().map(|r| r.iter().sum()).collect();
    tournament_from_sums(&sums, k, rng)
}

fn tournament_from_sums<R: Rng>(sums: &[f64], k: usize, rng: &mut R) -> usize {
    let mut best_idx = rng.gen_range(0..sums.len());
    for _ in 1..k.max(1) {
        let idx = rng.gen_range(0..sums.len());
        if sums[idx] > sums[best_idx] || (sums[idx] == sums[best_idx] && idx < best_idx) {
            best_idx = idx;
        }
    }
    best_idx
}

// Stream indices; separate streams keep the initial population identical
// when only the selection operator changes.
const STREAM_INIT: u64 = 0;
const STREAM_SELECTION: u64 = 1;
const STREAM_VARIATION: u64 = 2;
const STREAM_DOWNSAMPLE: u64 = 3;

/// Runs the generational loop and returns the best-on-train individual
/// of the final population together with per-generation statistics.
/// Fully deterministic for a given config.
pub fn evolve(data: &Dataset, cfg: &EvolutionConfig) -> Result<EvolveOutcome> {
    cfg.validate()?;
    let num_features = data.num_features();
    let mut init_rng = cfg.seed.stream(STREAM_INIT);
    let mut sel_rng = cfg.seed.stream(STREAM_SELECTION);
    let mut var_rng = cfg.seed.stream(STREAM_VARIATION);
    let mut down_rng = cfg.seed.stream(STREAM_DOWNSAMPLE);

    // Ramped half-and-half initialization, depths cycling 2..=5.
    let mut population: Vec<ExprTree> = (0..cfg.population_size)
        .map(|i| {
            let depth = 2 + (i / 2) % 4;
            tree::random_tree(&mut init_rng, num_features, depth, i % 2 == 0)
        })
        .collect();

    let mut stats = Vec::with_capacity(cfg.generations + 1);
    loop {
        let generation = stats.len();
        let (fitness, eval_ms) = timed(|| {
            let rows: Vec<Vec<f64>> = population.iter().map(|t| case_fitness(t, data)).collect();
            FitnessMatrix::from_rows(&rows, Orientation::Maximize)
                .expect("case fitness is finite by construction")
        });

        let means: Vec<f64> = fitness
            .rows()
            .map(|r| r.iter().sum::<f64>() / r.len() as f64)
            .collect();
        let mut ranked: Vec<usize> = (0..population.len()).collect();
        ranked.sort_unstable_by(|&a, &b| means[b].total_cmp(&means[a]).then(a.cmp(&b)));
        let best_idx = ranked[0];
        let unique_behaviors = matrix::dedup(&fitness).len();
        let mean_fitness = means.iter().sum::<f64>() / means.len() as f64;

        if generation == cfg.generations {
            stats.push(GenerationStats {
                generation,
                best_fitness: means[best_idx],
                mean_fitness,
                unique_behaviors,
                selection_ms: 0.0,
                eval_ms,
            });
            return Ok(EvolveOutcome {
                best: population[best_idx].clone(),
                best_fitness: means[best_idx],
                stats,
            });
        }

        // Downsampling happens once per generation, before selection;
        // epsilon is recomputed on the matrix actually used to select.
        let selection_matrix = match cfg.downsample_rate {
            Some(rate) => {
                let subset =
                    matrix::downsample_with_rng(fitness.num_cases(), rate, &mut down_rng)?;
                fitness.select_cases(&subset)
            }
            None => fitness.clone(),
        };

        let n_offspring = cfg.population_size - cfg.elitism;
        let n_draws = 2 * n_offspring;
        let (parents, selection_ms) = {
            let (parents, selection_ms) =
                timed(|| draw_parents(&selection_matrix, cfg.selection, n_draws, &mut sel_rng));
            (parents?, selection_ms)
        };

        stats.push(GenerationStats {
            generation,
            best_fitness: means[best_idx],
            mean_fitness,
            unique_behaviors,
            selection_ms,
            eval_ms,
        });

        let mut next = Vec::with_capacity(cfg.population_size);
        next.extend(ranked.iter().take(cfg.elitism).map(|&i| population[i].clone()));
        for o in 0..n_offspring {
            let p1 = &population[parents[2 * o]];
            let p2 = &population[parents[2 * o + 1]];
            let mut child = if var_rng.gen::<f64>() < cfg.crossover_rate {
                tree::crossover(p1, p2, cfg.max_depth, &mut var_rng)
            } else {
                p1.clone()
            };
            if var_rng.gen::<f64>() < cfg.mutation_rate {
                child = tree::mutate(&child, num_features, cfg.max_depth, &mut var_rng);
            }
            next.push(child);
        }
        population = next;
    }
}

fn draw_parents(
    m: &FitnessMatrix,
    method: SelectionMethod,
    n_draws: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    match method {
        SelectionMethod::Tournament { k } => {
            let sums: Vec<f64> = m.rows().map(|r| r.iter().sum()).collect();
            Ok((0..n_draws)
                .map(|_| tournament_from_sums(&sums, k, rng))
                .collect())
        }
        SelectionMethod::Lexicase => {
            Ok((0..n_draws).map(|_| lexicase::select_one(m, rng)).collect())
        }
        SelectionMethod::EpsilonLexicase => {
            let eps = lexicase::mad_epsilon(m);
            (0..n_draws)
                .map(|_| lexicase::epsilon_select_one(m, &eps, rng))
                .collect()
        }
        SelectionMethod::Plexicase { alpha } => {
            let dd = matrix::dedup(m);
            let d = plexicase::distribution(m, alpha, None, &dd)?;
            Ok(plexicase::sample_parents(&d, n_draws, rng))
        }
        SelectionMethod::EpsilonPlexicase { alpha } => {
            let eps = lexicase::mad_epsilon(m);
            let dd = matrix::dedup(m);
            let d = plexicase::distribution(m, alpha, Some(&eps), &dd)?;
            Ok(plexicase::sample_parents(&d, n_draws, rng))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_dataset() -> Dataset {
        // y = x0 over 12 samples, 9 train / 3 test.
        let rows: Vec<[f64; 1]> = (0..12).map(|i| [i as f64 / 3.0 - 2.0]).collect();
        let targets: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        Dataset::new(&rows, targets, (0..9).collect(), (9..12).collect()).unwrap()
    }

    #[test]
    fn case_fitness_examples() {
        let data = toy_dataset();
        // Perfect predictor: the identity tree.
        let t = ExprTree::from_nodes(alloc::vec![super::super::Node::Feature(0)], 1).unwrap();
        let row = case_fitness(&t, &data);
        assert_eq!(row.len(), 9);
        assert!(row.iter().all(|&v| v == 0.0));

        // Constant zero predictor against targets [1, 2].
        let rows = [[0.0], [0.0], [0.0]];
        let data =
            Dataset::new(&rows, alloc::vec![1.0, 2.0, 0.0], alloc::vec![0, 1], alloc::vec![2])
                .unwrap();
        let zero = ExprTree::from_nodes(alloc::vec![super::super::Node::Const(0.0)], 1).unwrap();
        assert_eq!(case_fitness(&zero, &data), alloc::vec![-1.0, -4.0]);
    }

    #[test]
    fn r_squared_examples() {
        let y = [0.0, 1.0, 2.0];
        assert_eq!(r_squared(&y, &y).unwrap(), 1.0);
        assert_eq!(r_squared(&[1.0, 1.0, 1.0], &y).unwrap(), 0.0);
        assert_eq!(r_squared(&[0.0, 0.0, 0.0], &y).unwrap(), -1.5);
        assert!(matches!(
            r_squared(&[1.0, 2.0], &[3.0, 3.0]),
            Err(Error::ConstantTargets)
        ));
    }

    #[test]
    fn evaluate_covers_every_sample() {
        let data = toy_dataset();
        let constant =
            ExprTree::from_nodes(alloc::vec![super::super::Node::Const(5.0)], 1).unwrap();
        assert_eq!(evaluate(&constant, &data), alloc::vec![5.0; 12]);
        let identity =
            ExprTree::from_nodes(alloc::vec![super::super::Node::Feature(0)], 1).unwrap();
        let preds = evaluate(&identity, &data);
        assert_eq!(preds.len(), data.num_samples());
        assert_eq!(preds, data.targets());
    }

    #[test]
    fn tournament_breaks_ties_by_lowest_index() {
        let m = FitnessMatrix::from_rows(
            &[[1.0, 1.0], [1.0, 1.0], [0.0, 0.0]],
            Orientation::Maximize,
        )
        .unwrap();
        let mut rng = RngSeed(2).stream(0);
        // Rows 0 and 1 tie on total fitness; with 50 draws both are in
        // the tournament, so the lower index must win.
        for _ in 0..50 {
            assert_eq!(tournament_select(&m, 50, &mut rng), 0);
        }
    }

    #[test]
    fn tournament_prefers_the_dominant_row() {
        let m = FitnessMatrix::from_rows(&[[1.0, 1.0], [0.0, 0.0]], Orientation::Maximize)
            .unwrap();
        let mut rng = RngSeed(0).stream(0);
        // With k = 2 the winner is row 0 whenever it is drawn; over many
        // trials row 1 only wins when both draws miss row 0.
        let mut zero_wins = 0;
        for _ in 0..400 {
            if tournament_select(&m, 2, &mut rng) == 0 {
                zero_wins += 1;
            }
        }
        assert!(zero_wins > 250, "zero_wins = {zero_wins}");
    }

    #[test]
    fn tournament_k1_is_uniformish() {
        let m = FitnessMatrix::from_rows(
            &[[1.0], [2.0], [3.0], [4.0]],
            Orientation::Maximize,
        )
        .unwrap();
        let mut rng = RngSeed(1).stream(0);
        let mut counts = [0usize; 4];
        for _ in 0..8000 {
            counts[tournament_select(&m, 1, &mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 / 8000.0 - 0.25).abs() < 0.05);
        }
    }

    #[test]
    fn zero_generations_returns_initial_best() {
        let data = toy_dataset();
        let cfg = EvolutionConfig::new(
            20,
            0,
            SelectionMethod::Tournament { k: 3 },
            RngSeed(7),
        );
        let out = evolve(&data, &cfg).unwrap();
        assert_eq!(out.stats.len(), 1);
        assert_eq!(out.stats[0].generation, 0);
        assert_eq!(out.stats[0].selection_ms, 0.0);
    }

    #[test]
    fn evolve_is_deterministic() {
        let data = toy_dataset();
        let cfg = EvolutionConfig::new(
            24,
            6,
            SelectionMethod::Plexicase { alpha: 1.0 },
            RngSeed(11),
        );
        let a = evolve(&data, &cfg).unwrap();
        let b = evolve(&data, &cfg).unwrap();
        assert_eq!(a.best, b.best);
        let strip = |s: &GenerationStats| {
            (
                s.generation,
                s.best_fitness.to_bits(),
                s.mean_fitness.to_bits(),
                s.unique_behaviors,
            )
        };
        assert_eq!(
            a.stats.iter().map(strip).collect::<Vec<_>>(),
            b.stats.iter().map(strip).collect::<Vec<_>>()
        );
    }

    #[test]
    fn initial_population_is_selection_independent() {
        let data = toy_dataset();
        let seed = RngSeed(3);
        let methods = [
            SelectionMethod::Tournament { k: 20 },
            SelectionMethod::Lexicase,
            SelectionMethod::EpsilonLexicase,
            SelectionMethod::Plexicase { alpha: 1.0 },
            SelectionMethod::EpsilonPlexicase { alpha: 1.0 },
        ];
        // Generation-0 statistics depend only on the initial population.
        let first: Vec<_> = methods
            .iter()
            .map(|&selection| {
                let cfg = EvolutionConfig::new(16, 1, selection, seed);
                let out = evolve(&data, &cfg).unwrap();
                (
                    out.stats[0].best_fitness.to_bits(),
                    out.stats[0].mean_fitness.to_bits(),
                    out.stats[0].unique_behaviors,
                )
            })
            .collect();
        assert!(first.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn config_validation() {
        let seed = RngSeed(0);
        let mut cfg = EvolutionConfig::new(1, 5, SelectionMethod::Lexicase, seed);
        assert!(cfg.validate().is_err());
        cfg.population_size = 10;
        cfg.crossover_rate = 1.5;
        assert!(cfg.validate().is_err());
        cfg.crossover_rate = 0.9;
        cfg.downsample_rate = Some(0.0);
        assert!(cfg.validate().is_err());
        cfg.downsample_rate = Some(0.5);
        assert!(cfg.validate().is_ok());
        let bad = EvolutionConfig::new(10, 5, SelectionMethod::Tournament { k: 0 }, seed);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn identity_target_is_recovered() {
        // A single-node tree solves y = x0; most seeds should find it.
        let rows: Vec<[f64; 1]> = (0..40).map(|i| [i as f64 / 10.0 - 2.0]).collect();
        let targets: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let data =
            Dataset::new(&rows, targets, (0..30).collect(), (30..40).collect()).unwrap();
        let mut solved = 0;
        for seed in 0..10 {
            let cfg = EvolutionConfig::new(
                200,
                50,
                SelectionMethod::Plexicase { alpha: 1.0 },
                RngSeed(seed),
            );
            let out = evolve(&data, &cfg).unwrap();
            let preds: Vec<f64> = data
                .train_indices()
                .iter()
                .map(|&s| out.best.eval_row(data.feature_row(s)))
                .collect();
            let r2 = r_squared(&preds, &data.train_targets()).unwrap();
            if r2 == 1.0 {
                solved += 1;
            }
        }
        assert!(solved >= 9, "solved {solved}/10");
    }

    #[test]
    fn max_depth_respected_over_a_run() {
        let data = toy_dataset();
        let mut cfg =
            EvolutionConfig::new(30, 8, SelectionMethod::Lexicase, RngSeed(5));
        cfg.max_depth = 4;
        let out = evolve(&data, &cfg).unwrap();
        assert!(out.best.depth() <= 4);
    }
}
