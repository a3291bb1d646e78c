use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jrme::{ModelConfig, NegativeMode, Variant};

mod commands;
mod failure;
mod manifest;

use failure::{Failure, USAGE};

/// Train and evaluate joint relation/mention embeddings.
#[derive(Debug, Parser)]
#[command(name = "jrme", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model and write it with a run manifest.
    Train(TrainArgs),
    /// Rank every relation for each test belief and report the metrics.
    Eval(EvalArgs),
    /// Train one model per hyperparameter combination and pick the best on validation.
    Grid(GridArgs),
    /// Print the top-scoring relations for (head, tail, mention) lines.
    Predict(PredictArgs),
    /// Print dataset statistics.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
struct TrainingArgs {
    #[arg(long, default_value = "jrme")]
    variant: Variant,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    /// `all`, or `sample:K` for K sampled corrupt relations.
    #[arg(long, default_value = "all")]
    neg: NegativeMode,
    /// Overridden by the JRME_SEED environment variable when set.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Keep entity vectors on the unit sphere only at initialization.
    #[arg(long)]
    no_normalize: bool,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    valid: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,
    #[command(flatten)]
    training: TrainingArgs,
    /// Worker threads; more than one gives up run-to-run reproducibility.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Required together with `--threads` above 1.
    #[arg(long)]
    nondeterministic_ok: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value = "jrme")]
    variant: Variant,
    /// Also write the per-belief ranks as TSV.
    #[arg(long)]
    ranks: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    valid: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "10,20,50,100,200")]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.1,1,2,5,10")]
    alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.1,1,2,5,10")]
    betas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.1,1,2,5,10")]
    gammas: Vec<f64>,
    #[command(flatten)]
    training: TrainingArgs,
    /// Write the selected configuration as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Lines of `head<TAB>tail<TAB>mention`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 10)]
    topk: usize,
    #[arg(long, default_value = "jrme")]
    variant: Variant,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    valid: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
}

impl TrainingArgs {
    fn config(&self, dim: usize, alpha: f64, beta: f64, gamma: f64) -> Result<ModelConfig, Failure> {
        let seed = match std::env::var("JRME_SEED") {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| Failure::usage(format!("JRME_SEED must be an unsigned integer, got '{s}'")))?,
            Err(_) => self.seed,
        };
        let config = ModelConfig {
            dim,
            alpha,
            beta,
            gamma,
            learning_rate: self.lr,
            epochs: self.epochs,
            neg_mode: self.neg,
            seed,
            normalize_entities: !self.no_normalize,
        };
        config.validate()?;
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Train(a) => commands::train(a),
        Command::Eval(a) => commands::eval(a),
        Command::Grid(a) => commands::grid(a),
        Command::Predict(a) => commands::predict(a),
        Command::Stats(a) => commands::stats(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let _ = std::io::stdout().flush();
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
