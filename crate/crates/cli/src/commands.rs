//! The four experiment commands. Each validates its parameters, runs the
//! experiment, writes a CSV report whose metadata echoes the full
//! configuration, and returns the headline numbers for the caller to
//! print.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use plexi_core::gp::{self, Dataset, EvolutionConfig, SelectionMethod};
use plexi_core::matrix::{self, FitnessMatrix, Orientation};
use plexi_core::oracle;
use plexi_core::plexicase;
use plexi_core::{lexicase, Error, RngSeed};

use crate::io::{self, Metadata};

// Seed derivation labels; keeping streams apart makes paired experiments
// share the per-event lexicase streams while nothing else collides.
const LABEL_PLEXI_SAMPLING: u64 = 1;
const LABEL_DOWNSAMPLE: u64 = 2;
const LABEL_WARMUP: u64 = 3;
const LABEL_SPLIT: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GenMode {
    Binary,
    Uniform,
}

impl GenMode {
    fn name(self) -> &'static str {
        match self {
            GenMode::Binary => "binary",
            GenMode::Uniform => "uniform",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EpsMode {
    Off,
    Mad,
}

impl EpsMode {
    fn name(self) -> &'static str {
        match self {
            EpsMode::Off => "off",
            EpsMode::Mad => "mad",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BenchOperator {
    Lexicase,
    Plexicase,
}

impl BenchOperator {
    fn name(self) -> &'static str {
        match self {
            BenchOperator::Lexicase => "lexicase",
            BenchOperator::Plexicase => "plexicase",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SelectionKind {
    Tournament,
    Lexicase,
    EpsLexicase,
    Plexicase,
    EpsPlexicase,
}

impl SelectionKind {
    fn name(self) -> &'static str {
        match self {
            SelectionKind::Tournament => "tournament",
            SelectionKind::Lexicase => "lexicase",
            SelectionKind::EpsLexicase => "eps-lexicase",
            SelectionKind::Plexicase => "plexicase",
            SelectionKind::EpsPlexicase => "eps-plexicase",
        }
    }
}

/// Seed-deterministic random matrix: binary entries are i.i.d. {0, 1},
/// uniform entries i.i.d. [0, 1).
pub fn generate_matrix(mode: GenMode, pop: usize, cases: usize, seed: u64) -> FitnessMatrix {
    use rand::Rng;
    let mut rng = RngSeed(seed).stream(0);
    let rows: Vec<Vec<f64>> = (0..pop)
        .map(|_| {
            (0..cases)
                .map(|_| match mode {
                    GenMode::Binary => rng.gen_range(0..2) as f64,
                    GenMode::Uniform => rng.gen::<f64>(),
                })
                .collect()
        })
        .collect();
    FitnessMatrix::from_rows(&rows, Orientation::Maximize).expect("generated entries are finite")
}

pub struct GenParams {
    pub mode: GenMode,
    pub pop: usize,
    pub cases: usize,
    pub seed: u64,
    pub out: PathBuf,
}

pub fn cmd_gen(p: &GenParams) -> Result<()> {
    if p.pop == 0 || p.cases == 0 {
        bail!("pop and cases must be at least 1");
    }
    let m = generate_matrix(p.mode, p.pop, p.cases, p.seed);
    let mut meta = Metadata::new("gen");
    meta.push("mode", p.mode.name());
    meta.push("pop", p.pop);
    meta.push("cases", p.cases);
    meta.push("seed", p.seed);
    let (header, rows) = io::matrix_rows(&m);
    io::write_csv(&p.out, &meta, &header, &rows)
}

/// Matrix input for `bench`: a CSV file or an on-the-fly generator.
pub enum MatrixSource {
    Path(PathBuf),
    Generated { mode: GenMode, pop: usize, cases: usize },
}

pub struct BenchParams {
    pub source: MatrixSource,
    pub n_selections: usize,
    pub operators: Vec<BenchOperator>,
    pub alpha: f64,
    pub eps: EpsMode,
    pub downsample: Option<f64>,
    pub seed: u64,
    pub out: PathBuf,
}

pub struct BenchReport {
    pub wall_ms: Vec<(BenchOperator, f64)>,
    pub speedup_vs_lexicase: Option<f64>,
}

/// Paired runtime comparison: both operators draw the same number of
/// parents from the identical matrix. The clock covers selection only;
/// matrix construction, downsampling, and the epsilon vector are
/// prepared beforehand, and each operator gets one untimed warm-up round
/// first.
pub fn cmd_bench(p: &BenchParams) -> Result<BenchReport> {
    if p.n_selections == 0 {
        bail!("n-selections must be at least 1");
    }
    if p.operators.is_empty() {
        bail!("at least one operator is required");
    }
    let full = match &p.source {
        MatrixSource::Path(path) => io::read_matrix_csv(path)?,
        MatrixSource::Generated { mode, pop, cases } => {
            generate_matrix(*mode, *pop, *cases, p.seed)
        }
    };
    let seed = RngSeed(p.seed);
    let (m, subset_note) = apply_downsample(&full, p.downsample, seed)?;
    let eps = match p.eps {
        EpsMode::Off => None,
        EpsMode::Mad => Some(lexicase::mad_epsilon(&m)),
    };

    let mut meta = Metadata::new("bench");
    match &p.source {
        MatrixSource::Path(path) => meta.push("matrix", path.display()),
        MatrixSource::Generated { mode, pop, cases } => {
            meta.push("gen_mode", mode.name());
            meta.push("pop", pop);
            meta.push("cases", cases);
        }
    }
    meta.push("n_selections", p.n_selections);
    meta.push(
        "operators",
        p.operators
            .iter()
            .map(|o| o.name())
            .collect::<Vec<_>>()
            .join(";"),
    );
    meta.push("alpha", p.alpha);
    meta.push("eps", p.eps.name());
    if let Some(rate) = p.downsample {
        meta.push("downsample", rate);
        meta.push("downsample_cases", subset_note);
        if p.eps == EpsMode::Mad {
            meta.push("eps_scope", "downsampled-matrix");
        }
    }
    meta.push("seed", p.seed);
    meta.push("threads", 1);

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut wall = Vec::new();
    let mut lexicase_ms = None;
    let mut plexicase_ms = None;
    for &op in &p.operators {
        let (ms, parents) = match op {
            BenchOperator::Lexicase => {
                let warm = seed.derive(LABEL_WARMUP);
                lexicase::select_parents_repeated(&m, 1, eps.as_ref(), warm)?;
                let start = Instant::now();
                let parents =
                    lexicase::select_parents_repeated(&m, p.n_selections, eps.as_ref(), seed)?;
                (start.elapsed().as_secs_f64() * 1e3, parents)
            }
            BenchOperator::Plexicase => {
                let warm = seed.derive(LABEL_WARMUP);
                let dd = matrix::dedup(&m);
                let d = plexicase::distribution(&m, p.alpha, eps.as_ref(), &dd)?;
                plexicase::sample_parents(&d, 1, &mut warm.stream(0));
                let start = Instant::now();
                let dd = matrix::dedup(&m);
                let d = plexicase::distribution(&m, p.alpha, eps.as_ref(), &dd)?;
                let parents = plexicase::sample_parents(
                    &d,
                    p.n_selections,
                    &mut seed.derive(LABEL_PLEXI_SAMPLING).stream(0),
                );
                (start.elapsed().as_secs_f64() * 1e3, parents)
            }
        };
        match op {
            BenchOperator::Lexicase => lexicase_ms = Some(ms),
            BenchOperator::Plexicase => plexicase_ms = Some(ms),
        }
        wall.push((op, ms));
        rows.push(vec![format!("wall_ms_{}", op.name()), ms.to_string()]);
        rows.push(vec![
            format!("per_selection_us_{}", op.name()),
            (ms * 1e3 / p.n_selections as f64).to_string(),
        ]);
        rows.push(vec![
            format!("parents_hash_{}", op.name()),
            io::parent_multiset_hash(&parents),
        ]);
    }
    // Speed-up of n means the plexicase runtime is 1/n of lexicase's.
    let speedup = match (lexicase_ms, plexicase_ms) {
        (Some(l), Some(x)) if x > 0.0 => Some(l / x),
        _ => None,
    };
    if let Some(s) = speedup {
        rows.push(vec!["speedup_vs_lexicase".into(), s.to_string()]);
    }
    io::write_csv(&p.out, &meta, "metric,value", &rows)?;
    Ok(BenchReport {
        wall_ms: wall,
        speedup_vs_lexicase: speedup,
    })
}

fn apply_downsample(
    full: &FitnessMatrix,
    rate: Option<f64>,
    seed: RngSeed,
) -> Result<(FitnessMatrix, String)> {
    match rate {
        None => Ok((full.clone(), String::new())),
        Some(rate) => {
            let subset = matrix::downsample_with_rng(
                full.num_cases(),
                rate,
                &mut seed.derive(LABEL_DOWNSAMPLE).stream(0),
            )?;
            let note = subset
                .indices()
                .iter()
                .map(|j| j.to_string())
                .collect::<Vec<_>>()
                .join(";");
            Ok((full.select_cases(&subset), note))
        }
    }
}

pub struct CompareParams {
    pub matrix: PathBuf,
    pub alpha: f64,
    pub eps: EpsMode,
    pub trials: u64,
    pub mc: bool,
    pub downsample: Option<f64>,
    pub seed: u64,
    pub out: PathBuf,
}

pub struct CompareReport {
    pub total_variation: f64,
    pub overlap_all: f64,
    pub overlap_unique: f64,
}

/// Side-by-side distributions plus overlap of paired selections: the
/// one-shot probabilistic distribution against the exact (or Monte-Carlo)
/// lexicase probabilities, with `trials` paired selection events sharing
/// the seed.
pub fn cmd_compare(p: &CompareParams) -> Result<CompareReport> {
    if p.trials == 0 {
        bail!("trials must be at least 1");
    }
    let full = io::read_matrix_csv(&p.matrix)?;
    let seed = RngSeed(p.seed);
    let (m, subset_note) = apply_downsample(&full, p.downsample, seed)?;
    let eps = match p.eps {
        EpsMode::Off => None,
        EpsMode::Mad => Some(lexicase::mad_epsilon(&m)),
    };

    let dd = matrix::dedup(&m);
    let plexi = plexicase::distribution(&m, p.alpha, eps.as_ref(), &dd)?;
    let lexi_parents =
        lexicase::select_parents_repeated(&m, p.trials as usize, eps.as_ref(), seed)?;

    let (lexi_probs, lexi_method): (Vec<f64>, &str) = if p.mc {
        // Empirical frequencies over the same paired events used for the
        // overlap, so epsilon variants are estimated consistently.
        let mut counts = vec![0u64; m.pop_size()];
        for &i in &lexi_parents {
            counts[i] += 1;
        }
        (
            counts
                .into_iter()
                .map(|c| c as f64 / p.trials as f64)
                .collect(),
            "monte-carlo",
        )
    } else {
        if eps.is_some() {
            bail!("the exact oracle covers plain lexicase only; pass --mc for eps variants");
        }
        let exact = oracle::exact_lexicase_probabilities(&m).map_err(|e| match e {
            Error::OracleCapacity { .. } => {
                anyhow::anyhow!("{e}; pass --mc to estimate instead")
            }
            other => anyhow::anyhow!(other),
        })?;
        (exact.probs().to_vec(), "exhaustive-recursion")
    };

    let plexi_parents = plexicase::sample_parents(
        &plexi,
        p.trials as usize,
        &mut seed.derive(LABEL_PLEXI_SAMPLING).stream(0),
    );
    let (overlap_all, overlap_unique) = oracle::overlap_ratio(&plexi_parents, &lexi_parents)?;
    let tv = oracle::total_variation(plexi.probs(), &lexi_probs)?;

    let mut meta = Metadata::new("compare");
    meta.push("matrix", p.matrix.display());
    meta.push("alpha", p.alpha);
    meta.push("eps", p.eps.name());
    meta.push("trials", p.trials);
    meta.push("lexicase_method", lexi_method);
    if let Some(rate) = p.downsample {
        meta.push("downsample", rate);
        meta.push("downsample_cases", subset_note);
        if p.eps == EpsMode::Mad {
            meta.push("eps_scope", "downsampled-matrix");
        }
    }
    meta.push("seed", p.seed);

    let mut rows: Vec<Vec<String>> = (0..m.pop_size())
        .map(|i| {
            vec![
                i.to_string(),
                plexi.probs()[i].to_string(),
                lexi_probs[i].to_string(),
            ]
        })
        .collect();
    rows.push(vec!["overlap_all".into(), overlap_all.to_string(), String::new()]);
    rows.push(vec![
        "overlap_unique".into(),
        overlap_unique.to_string(),
        String::new(),
    ]);
    rows.push(vec!["total_variation".into(), tv.to_string(), String::new()]);
    io::write_csv(
        &p.out,
        &meta,
        "individual,plexicase_probability,lexicase_probability",
        &rows,
    )?;
    Ok(CompareReport {
        total_variation: tv,
        overlap_all,
        overlap_unique,
    })
}

pub struct EvolveParams {
    pub data: PathBuf,
    pub selection: SelectionKind,
    pub alpha: f64,
    pub tournament_k: usize,
    pub pop: usize,
    pub gens: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub max_depth: usize,
    pub downsample: Option<f64>,
    pub train_fraction: f64,
    pub seed: u64,
    pub out: PathBuf,
}

pub struct EvolveReport {
    pub best_infix: String,
    pub train_r2: f64,
    pub test_r2: f64,
    pub model_path: PathBuf,
}

/// Runs the symbolic-regression loop on a CSV dataset, writing the
/// per-generation stats CSV and a sibling `.model.txt` with the best
/// tree as an infix expression.
pub fn cmd_evolve(p: &EvolveParams) -> Result<EvolveReport> {
    let (features, targets) = io::read_dataset_csv(&p.data)?;
    let data = Dataset::split_random(
        &features,
        targets,
        p.train_fraction,
        RngSeed(p.seed).derive(LABEL_SPLIT),
    )?;
    let selection = match p.selection {
        SelectionKind::Tournament => SelectionMethod::Tournament { k: p.tournament_k },
        SelectionKind::Lexicase => SelectionMethod::Lexicase,
        SelectionKind::EpsLexicase => SelectionMethod::EpsilonLexicase,
        SelectionKind::Plexicase => SelectionMethod::Plexicase { alpha: p.alpha },
        SelectionKind::EpsPlexicase => SelectionMethod::EpsilonPlexicase { alpha: p.alpha },
    };
    let cfg = EvolutionConfig {
        population_size: p.pop,
        generations: p.gens,
        selection,
        crossover_rate: p.crossover_rate,
        mutation_rate: p.mutation_rate,
        max_depth: p.max_depth,
        downsample_rate: p.downsample,
        elitism: 1,
        seed: RngSeed(p.seed),
    };
    let outcome = gp::evolve(&data, &cfg).with_context(|| "evolution failed")?;

    let r2_on = |indices: &[usize]| -> f64 {
        let preds: Vec<f64> = indices
            .iter()
            .map(|&s| outcome.best.eval_row(data.feature_row(s)))
            .collect();
        let targets: Vec<f64> = indices.iter().map(|&s| data.target(s)).collect();
        gp::r_squared(&preds, &targets).unwrap_or(f64::NAN)
    };
    let train_r2 = r2_on(data.train_indices());
    let test_r2 = r2_on(data.test_indices());

    let mut meta = Metadata::new("evolve");
    meta.push("data", p.data.display());
    meta.push("selection", p.selection.name());
    meta.push("alpha", p.alpha);
    meta.push("tournament_k", p.tournament_k);
    meta.push("pop", p.pop);
    meta.push("gens", p.gens);
    meta.push("crossover_rate", p.crossover_rate);
    meta.push("mutation_rate", p.mutation_rate);
    meta.push("max_depth", p.max_depth);
    if let Some(rate) = p.downsample {
        meta.push("downsample", rate);
    }
    if matches!(
        p.selection,
        SelectionKind::EpsLexicase | SelectionKind::EpsPlexicase
    ) {
        meta.push("eps_scope", "per-generation-selection-matrix");
    }
    meta.push("train_fraction", p.train_fraction);
    meta.push("elitism", 1);
    meta.push("seed", p.seed);

    let rows: Vec<Vec<String>> = outcome
        .stats
        .iter()
        .map(|s| {
            vec![
                s.generation.to_string(),
                s.best_fitness.to_string(),
                s.mean_fitness.to_string(),
                s.unique_behaviors.to_string(),
                s.selection_ms.to_string(),
                s.eval_ms.to_string(),
            ]
        })
        .collect();
    io::write_csv(
        &p.out,
        &meta,
        "generation,best_fitness,mean_fitness,unique_behaviors,selection_ms,eval_ms",
        &rows,
    )?;

    let best_infix = outcome.best.to_infix();
    let model_path = p.out.with_extension("model.txt");
    let model = format!(
        "best_model = {best_infix}\ntrain_r2 = {train_r2}\ntest_r2 = {test_r2}\nbest_fitness = {}\n",
        outcome.best_fitness
    );
    std::fs::write(&model_path, model)
        .with_context(|| format!("cannot write {}", model_path.display()))?;

    Ok(EvolveReport {
        best_infix,
        train_r2,
        test_r2,
        model_path,
    })
}
