mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use conealign::exec::Execution;

use config::{ConfigError, FileConfig};

/// Cone-aligned training of cost predictors for binary linear programs.
#[derive(Parser)]
#[command(name = "conealign", version)]
struct Cli {
    /// JSON config file; command-line flags take precedence over its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads [default: all cores]. 1 runs everything sequentially.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (meta.json + samples.csv).
    Generate(GenerateArgs),
    /// Train a linear model on a dataset (model.json + log.csv).
    Train(TrainArgs),
    /// Normalized regret of a trained model on a dataset.
    Eval(EvalArgs),
    /// Multi-seed comparison of methods (report.csv + report.md).
    Benchmark(BenchmarkArgs),
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Problem: spN, spHxW or tspN (N ≤ 15) [default: sp5]
    #[arg(long)]
    problem: Option<String>,
    /// Polynomial degree of the feature map [default: 4]
    #[arg(long)]
    deg: Option<u32>,
    /// Number of samples [default: 1000]
    #[arg(long)]
    n: Option<usize>,
    /// Noise half-width h, ε ~ U[1 − h, 1 + h] [default: 0.5]
    #[arg(long)]
    noise: Option<f64>,
    /// Random seed [default: 0]
    #[arg(long, env = "CONEALIGN_SEED")]
    seed: Option<u64>,
    /// Output directory (required)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Training dataset directory (required)
    #[arg(long)]
    data: Option<PathBuf>,
    /// Validation dataset directory; enables per-epoch validation regret [default: none]
    #[arg(long)]
    val: Option<PathBuf>,
    /// Method: 2stage, cave-e, cave+, cave-h, spo+ or pfyl [default: cave+]
    #[arg(long)]
    method: Option<String>,
    /// Learning rate [default: 0.01 for shortest path, 0.05 for TSP]
    #[arg(long)]
    lr: Option<f64>,
    /// Epochs [default: 10, or 20 for 2stage]
    #[arg(long)]
    epochs: Option<usize>,
    /// Mini-batch size [default: 32]
    #[arg(long)]
    batch_size: Option<usize>,
    /// Seed for initialization, shuffling and loss noise [default: 0]
    #[arg(long, env = "CONEALIGN_SEED")]
    seed: Option<u64>,
    /// Output directory (required)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Model file written by `train` (required)
    #[arg(long)]
    model: Option<PathBuf>,
    /// Dataset directory (required)
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Args)]
pub struct BenchmarkArgs {
    /// Problem: spN, spHxW or tspN (N ≤ 15) [default: sp5]
    #[arg(long)]
    problem: Option<String>,
    /// Polynomial degree of the feature map [default: 4]
    #[arg(long)]
    deg: Option<u32>,
    /// Comma-separated methods [default: 2stage,cave-e,cave+,cave-h,spo+,pfyl]
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Number of seeds [default: 5]
    #[arg(long)]
    seeds: Option<usize>,
    /// Root seed all run seeds derive from [default: 0]
    #[arg(long, env = "CONEALIGN_SEED")]
    seed: Option<u64>,
    /// Training samples per seed [default: 1000]
    #[arg(long)]
    n_train: Option<usize>,
    /// Validation samples per seed; 0 disables validation [default: 1000]
    #[arg(long)]
    n_val: Option<usize>,
    /// Test samples per seed [default: 1000]
    #[arg(long)]
    n_test: Option<usize>,
    /// Noise half-width h [default: 0.5]
    #[arg(long)]
    noise: Option<f64>,
    /// Learning rate for every method [default: per problem]
    #[arg(long)]
    lr: Option<f64>,
    /// Epochs for every method [default: per method]
    #[arg(long)]
    epochs: Option<usize>,
    /// Mini-batch size [default: 32]
    #[arg(long)]
    batch_size: Option<usize>,
    /// Output directory (required)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use conealign::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Config { .. } => 2,
                E::Io(_) | E::Json(_) | E::Csv(_) => 3,
                E::NonFinite { .. } => 4,
                _ => 1,
            };
        }
        if cause.is::<ConfigError>() {
            return 2;
        }
        if cause.is::<std::io::Error>() {
            return 3;
        }
    }
    1
}

fn execution(threads: Option<usize>) -> anyhow::Result<Execution> {
    match threads {
        Some(0) => Err(ConfigError("`threads` must be at least 1".into()).into()),
        Some(1) => Ok(Execution::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| anyhow::anyhow!("cannot start thread pool: {e}"))?;
            Ok(Execution::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(Execution::Sequential),
        None => Ok(Execution::Parallel),
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let exec = execution(cli.threads)?;
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Generate(a) => commands::generate(a, file, exec)?,
        Command::Train(a) => commands::train_cmd(a, file, exec)?,
        Command::Eval(a) => commands::eval(a, file, exec)?,
        Command::Benchmark(a) => {
            let failed = commands::benchmark(a, file, exec)?;
            if failed > 0 {
                eprintln!("error: {failed} run(s) failed; see report.md");
                return Ok(5);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
