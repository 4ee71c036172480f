use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use plexi_cli::commands::{
    self, BenchOperator, BenchParams, CompareParams, EpsMode, EvolveParams, GenMode, GenParams,
    MatrixSource, SelectionKind,
};

/// Selection-operator experiments: generate fitness matrices, benchmark
/// lexicase against its probabilistic approximation, compare selection
/// distributions, and run toy symbolic-regression evolutions.
#[derive(Parser)]
#[command(name = "plexi", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random fitness matrix as CSV.
    Gen(GenArgs),
    /// Paired runtime comparison of selection operators on one matrix.
    Bench(BenchArgs),
    /// Compare the probabilistic distribution against exact or estimated
    /// lexicase probabilities, with overlap of paired selections.
    Compare(CompareArgs),
    /// Evolve a symbolic regressor on a CSV dataset.
    Evolve(EvolveArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Entry distribution.
    #[arg(long, value_enum)]
    mode: GenMode,
    /// Number of individuals (rows).
    #[arg(long)]
    pop: usize,
    /// Number of cases (columns).
    #[arg(long)]
    cases: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Matrix CSV to benchmark on; mutually exclusive with --gen-mode.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Generate the matrix instead of reading it.
    #[arg(long, value_enum)]
    gen_mode: Option<GenMode>,
    #[arg(long, default_value_t = 1000)]
    pop: usize,
    #[arg(long, default_value_t = 200)]
    cases: usize,
    /// Number of parents each operator must produce.
    #[arg(long, default_value_t = 1000)]
    n_selections: usize,
    /// Operators to time, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [BenchOperator::Lexicase, BenchOperator::Plexicase])]
    operators: Vec<BenchOperator>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = EpsMode::Off)]
    eps: EpsMode,
    /// Case downsampling rate in (0, 1], applied before timing.
    #[arg(long)]
    downsample: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = EpsMode::Off)]
    eps: EpsMode,
    /// Paired selection events for the overlap ratios (and the
    /// Monte-Carlo estimate under --mc).
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Estimate lexicase probabilities by Monte-Carlo instead of the
    /// exact recursion.
    #[arg(long)]
    mc: bool,
    #[arg(long)]
    downsample: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvolveArgs {
    /// Dataset CSV: feature columns, then a final target column `y`.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = SelectionKind::Plexicase)]
    selection: SelectionKind,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 20)]
    tournament_k: usize,
    #[arg(long, default_value_t = 300)]
    pop: usize,
    #[arg(long, default_value_t = 100)]
    gens: usize,
    #[arg(long, default_value_t = 0.9)]
    crossover_rate: f64,
    #[arg(long, default_value_t = 0.1)]
    mutation_rate: f64,
    #[arg(long, default_value_t = 8)]
    max_depth: usize,
    /// Per-generation case downsampling rate in (0, 1].
    #[arg(long)]
    downsample: Option<f64>,
    #[arg(long, default_value_t = 0.75)]
    train_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stats CSV path; the best model lands next to it as
    /// `<out>.model.txt`.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(a) => {
            commands::cmd_gen(&GenParams {
                mode: a.mode,
                pop: a.pop,
                cases: a.cases,
                seed: a.seed,
                out: a.out.clone(),
            })?;
            println!("wrote {}", a.out.display());
        }
        Command::Bench(a) => {
            let source = match (&a.matrix, a.gen_mode) {
                (Some(path), None) => MatrixSource::Path(path.clone()),
                (None, Some(mode)) => MatrixSource::Generated {
                    mode,
                    pop: a.pop,
                    cases: a.cases,
                },
                (Some(_), Some(_)) => bail!("--matrix and --gen-mode are mutually exclusive"),
                (None, None) => bail!("either --matrix or --gen-mode is required"),
            };
            let report = commands::cmd_bench(&BenchParams {
                source,
                n_selections: a.n_selections,
                operators: a.operators,
                alpha: a.alpha,
                eps: a.eps,
                downsample: a.downsample,
                seed: a.seed,
                out: a.out.clone(),
            })?;
            for (op, ms) in &report.wall_ms {
                println!("{:?}: {ms:.3} ms", op);
            }
            if let Some(s) = report.speedup_vs_lexicase {
                println!("speedup vs lexicase: {s:.2}x");
            }
            println!("wrote {}", a.out.display());
        }
        Command::Compare(a) => {
            let report = commands::cmd_compare(&CompareParams {
                matrix: a.matrix,
                alpha: a.alpha,
                eps: a.eps,
                trials: a.trials,
                mc: a.mc,
                downsample: a.downsample,
                seed: a.seed,
                out: a.out.clone(),
            })?;
            println!(
                "total variation {:.4}, overlap all {:.4}, overlap unique {:.4}",
                report.total_variation, report.overlap_all, report.overlap_unique
            );
            println!("wrote {}", a.out.display());
        }
        Command::Evolve(a) => {
            let report = commands::cmd_evolve(&EvolveParams {
                data: a.data,
                selection: a.selection,
                alpha: a.alpha,
                tournament_k: a.tournament_k,
                pop: a.pop,
                gens: a.gens,
                crossover_rate: a.crossover_rate,
                mutation_rate: a.mutation_rate,
                max_depth: a.max_depth,
                downsample: a.downsample,
                train_fraction: a.train_fraction,
                seed: a.seed,
                out: a.out.clone(),
            })?;
            println!("best model: {}", report.best_infix);
            println!(
                "train r2 {:.4}, test r2 {:.4}",
                report.train_r2, report.test_r2
            );
            println!("wrote {} and {}", a.out.display(), report.model_path.display());
        }
    }
    Ok(())
}
