//! `keyattr`: find the case-id, activity and timestamp columns of an event log.

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use keyattr::{Metric, MinerKind, PipelineConfig};

#[derive(Parser)]
#[command(name = "keyattr", version, about = "Identify key attributes of unlabeled event logs")]
struct Cli {
    /// More log output on stderr (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a role model from a labeled corpus directory.
    Train(TrainArgs),
    /// Identify the key attributes of one CSV log.
    Identify(IdentifyArgs),
    /// Measure per-role accuracy over a labeled corpus.
    Evaluate(EvaluateArgs),
    /// Write a synthetic labeled corpus.
    Generate(GenerateArgs),
    /// Discover a process model from known key attributes and write it as DOT.
    Discover(DiscoverArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output model file.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    /// Rows per log used for features.
    #[arg(long, default_value_t = 1000)]
    pub rows: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Args)]
pub struct PipelineArgs {
    /// Candidates kept per role.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value = "hm")]
    pub miner: MinerKind,
    #[arg(long, default_value = "generalization")]
    pub metric: Metric,
    /// Rows read from each log.
    #[arg(long, default_value_t = 1000)]
    pub rows: usize,
    /// Discovery timeout in seconds.
    #[arg(long, default_value_t = 5.0)]
    pub th_dis: f64,
    /// Evaluation timeout in seconds.
    #[arg(long, default_value_t = 60.0)]
    pub th_eval: f64,
    /// Timestamp candidates parsing below this fraction are not scored.
    #[arg(long, default_value_t = 0.9)]
    pub min_ts_parse: f64,
    /// Also score combos whose traces never change activity.
    #[arg(long)]
    pub keep_flat: bool,
    /// Parallel combo evaluations (default: all cores).
    #[arg(long, env = "KEYATTR_JOBS")]
    pub jobs: Option<usize>,
}

impl PipelineArgs {
    pub fn config(&self) -> PipelineConfig {
        PipelineConfig {
            k: self.k,
            n_rows: self.rows,
            miner: self.miner,
            metric: self.metric,
            th_dis: self.th_dis,
            th_eval: self.th_eval,
            min_ts_parse_fraction: self.min_ts_parse,
            skip_flat_combos: !self.keep_flat,
            jobs: self.jobs,
            ..Default::default()
        }
    }
}

#[derive(Args)]
pub struct IdentifyArgs {
    #[arg(long)]
    pub log: PathBuf,
    /// Model file; the bundled model is used when omitted.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Model file; the bundled model is used when omitted.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Retrain without each log before identifying it.
    #[arg(long)]
    pub holdout: bool,
    /// Forest seed for --holdout retraining.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub distractors: usize,
    #[arg(long, default_value_t = 100)]
    pub cases: usize,
}

#[derive(Args)]
pub struct DiscoverArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long)]
    pub case: String,
    #[arg(long)]
    pub activity: String,
    #[arg(long)]
    pub timestamp: String,
    #[arg(long, default_value = "hm")]
    pub miner: MinerKind,
    /// Output DOT file; stdout when omitted.
    #[arg(long)]
    pub dot: Option<PathBuf>,
    /// Rows read from the log (0 reads all).
    #[arg(long, default_value_t = 0)]
    pub rows: usize,
}

/// Bad flag values that clap cannot catch on its own; exits with code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Done,
    Fallback,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let result = match &cli.command {
        Command::Train(args) => commands::train(args),
        Command::Identify(args) => commands::identify(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Generate(args) => commands::generate(args),
        Command::Discover(args) => commands::discover(args),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Fallback) => ExitCode::from(3),
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
