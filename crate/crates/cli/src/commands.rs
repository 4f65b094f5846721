use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use keyattr::classifier::ClassifierError;
use keyattr::discovery::{mine_heuristics, mine_inductive, net_to_dot, tree_to_net, MinerKind, MinerParams};
use keyattr::pipeline::{PipelineError, Stage, Timings};
use keyattr::synthgen::{corpus_entries, generate_corpus, read_labels, write_corpus, SynthConfig};
use keyattr::{
    build_traces, identify as run_identify, load_csv, parse_timestamp_column, train as fit, Combo, EventLog,
    Hyperparameters, PipelineConfig, Role, RoleModel, TrainingCorpus,
};
use serde::Serialize;

use crate::render;
use crate::{DiscoverArgs, EvaluateArgs, Format, GenerateArgs, IdentifyArgs, Outcome, TrainArgs, UsageError};

pub const DEFAULT_MODEL: &str = include_str!("../assets/default_model.json");

pub const EVALUATION_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct PerRole<T> {
    pub case: T,
    pub activity: T,
    pub timestamp: T,
}

impl<T> PerRole<T> {
    fn from_fn(mut f: impl FnMut(Role) -> T) -> Self {
        Self {
            case: f(Role::Case),
            activity: f(Role::Activity),
            timestamp: f(Role::Timestamp),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TrainSummary {
    pub model: String,
    pub n_logs: usize,
    pub n_columns: usize,
    pub positives: PerRole<usize>,
    pub seed: u64,
    pub hyperparameters: Hyperparameters,
}

#[derive(Debug, Serialize)]
pub struct LogResult {
    pub source: String,
    pub truth: Combo,
    pub chosen: Combo,
    pub correct: PerRole<bool>,
    pub stage: Stage,
    pub fallback: bool,
    pub combos_scored: usize,
    pub timings: Timings,
}

#[derive(Debug, Serialize)]
pub struct Evaluation {
    pub schema_version: u32,
    pub n_logs: usize,
    pub holdout: bool,
    pub accuracy: PerRole<f64>,
    pub mean_timings: Timings,
    pub logs: Vec<LogResult>,
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn load_model(path: Option<&Path>) -> Result<RoleModel> {
    match path {
        Some(p) => RoleModel::load(p).with_context(|| format!("cannot load model {}", p.display())),
        None => RoleModel::from_json(DEFAULT_MODEL).context("bundled model is unreadable"),
    }
}

fn checked(config: PipelineConfig) -> Result<PipelineConfig> {
    config.validate().map_err(|e| UsageError(e.to_string()))?;
    Ok(config)
}

fn hyperparameters(trees: usize, depth: usize) -> Result<Hyperparameters> {
    let hyper = Hyperparameters {
        n_trees: trees,
        max_depth: depth,
        ..Default::default()
    };
    hyper.validate().map_err(|e| UsageError(e.to_string()))?;
    Ok(hyper)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

/// Labeled logs of a corpus directory. Every CSV needs a labels sidecar.
fn read_corpus(dir: &Path, rows: usize) -> Result<Vec<(String, EventLog, Combo)>> {
    let mut unlabeled = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("cannot read corpus {}", dir.display()))? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "csv") && !path.with_extension("labels.json").exists() {
            unlabeled.push(file_name(&path));
        }
    }
    if !unlabeled.is_empty() {
        unlabeled.sort();
        bail!("missing labels for {}", unlabeled.join(", "));
    }
    let entries = corpus_entries(dir)?;
    if entries.is_empty() {
        bail!("{}: no labeled logs found", dir.display());
    }
    entries
        .into_iter()
        .map(|(csv, labels)| {
            let log = load_csv(&csv, rows)?;
            let combo = read_labels(&labels)?;
            for role in Role::ALL {
                if log.column(combo.get(role)).is_none() {
                    bail!(
                        "{}: labeled {role} column {:?} is not in the log",
                        file_name(&csv),
                        combo.get(role)
                    );
                }
            }
            Ok((file_name(&csv), log, combo))
        })
        .collect()
}

fn training_corpus<'a>(logs: impl IntoIterator<Item = &'a (String, EventLog, Combo)>, rows: usize) -> TrainingCorpus {
    let mut corpus = TrainingCorpus::new();
    for (_, log, combo) in logs {
        corpus.add_log(log, combo, rows);
    }
    corpus
}

fn fit_model(corpus: &TrainingCorpus, hyper: &Hyperparameters, seed: u64) -> Result<RoleModel> {
    fit(corpus, hyper, seed).map_err(|e| match e {
        ClassifierError::Hyperparameters(msg) => UsageError(msg).into(),
        other => anyhow!(other),
    })
}

pub fn train(args: &TrainArgs) -> Result<Outcome> {
    let hyper = hyperparameters(args.trees, args.depth)?;
    let logs = read_corpus(&args.corpus, args.rows)?;
    let corpus = training_corpus(&logs, args.rows);
    let model = fit_model(&corpus, &hyper, args.seed)?;
    model
        .save(&args.model)
        .with_context(|| format!("cannot write {}", args.model.display()))?;
    let summary = TrainSummary {
        model: file_name(&args.model),
        n_logs: logs.len(),
        n_columns: corpus.entries.len(),
        positives: PerRole::from_fn(|r| corpus.positives(r)),
        seed: args.seed,
        hyperparameters: hyper,
    };
    match args.format {
        Format::Json => print_json(&summary)?,
        Format::Text => print!("{}", render::train_summary(&summary)),
    }
    Ok(Outcome::Done)
}

pub fn identify(args: &IdentifyArgs) -> Result<Outcome> {
    let config = checked(args.pipeline.config())?;
    let model = load_model(args.model.as_deref())?;
    let log = load_csv(&args.log, config.n_rows)?;
    let report = run_identify(&log, &model, &config).map_err(|e| match e {
        PipelineError::Config(msg) => UsageError(msg).into(),
        other => anyhow!(other),
    })?;
    match args.format {
        Format::Json => print_json(&report)?,
        Format::Text => print!("{}", render::report(&report)),
    }
    Ok(if report.fallback {
        Outcome::Fallback
    } else {
        Outcome::Done
    })
}

pub fn evaluate(args: &EvaluateArgs) -> Result<Outcome> {
    let config = checked(args.pipeline.config())?;
    let hyper = hyperparameters(args.trees, args.depth)?;
    let logs = read_corpus(&args.corpus, config.n_rows)?;
    let shared = if args.holdout {
        None
    } else {
        Some(load_model(args.model.as_deref())?)
    };

    let mut results = Vec::with_capacity(logs.len());
    for (i, (source, log, truth)) in logs.iter().enumerate() {
        let held_out;
        let model = match &shared {
            Some(m) => m,
            None => {
                let rest = logs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, l)| l);
                held_out = fit_model(&training_corpus(rest, config.n_rows), &hyper, args.seed)
                    .with_context(|| format!("retraining without {source}"))?;
                &held_out
            }
        };
        let report = run_identify(log, model, &config).with_context(|| source.clone())?;
        let correct = PerRole::from_fn(|r| report.chosen.get(r) == truth.get(r));
        log::info!("{source}: chose {} (truth {})", report.chosen, truth);
        results.push(LogResult {
            source: source.clone(),
            truth: truth.clone(),
            chosen: report.chosen.clone(),
            correct,
            stage: report.stage,
            fallback: report.fallback,
            combos_scored: report.combos_scored.len(),
            timings: report.timings,
        });
    }

    let n = results.len() as f64;
    let hits = |f: fn(&PerRole<bool>) -> bool| results.iter().filter(|r| f(&r.correct)).count() as f64 / n;
    let evaluation = Evaluation {
        schema_version: EVALUATION_SCHEMA_VERSION,
        n_logs: results.len(),
        holdout: args.holdout,
        accuracy: PerRole {
            case: hits(|c| c.case),
            activity: hits(|c| c.activity),
            timestamp: hits(|c| c.timestamp),
        },
        mean_timings: Timings {
            stage1_s: results.iter().map(|r| r.timings.stage1_s).sum::<f64>() / n,
            stage2_s: results.iter().map(|r| r.timings.stage2_s).sum::<f64>() / n,
        },
        logs: results,
    };
    match args.format {
        Format::Json => print_json(&evaluation)?,
        Format::Text => print!("{}", render::evaluation(&evaluation)),
    }
    Ok(Outcome::Done)
}

pub fn generate(args: &GenerateArgs) -> Result<Outcome> {
    if args.cases < 2 {
        return Err(UsageError("--cases must be at least 2".into()).into());
    }
    let template = SynthConfig {
        n_cases: args.cases,
        n_distractors: args.distractors,
        ..Default::default()
    };
    let logs = generate_corpus(args.seed, args.count, &template);
    write_corpus(&args.out, &logs)?;
    eprintln!("wrote {} labeled logs to {}", logs.len(), args.out.display());
    Ok(Outcome::Done)
}

pub fn discover(args: &DiscoverArgs) -> Result<Outcome> {
    let rows = if args.rows == 0 { usize::MAX } else { args.rows };
    let log = load_csv(&args.log, rows)?;
    let ts_cells = &log
        .column(&args.timestamp)
        .ok_or_else(|| anyhow!("unknown column {:?}", args.timestamp))?
        .cells;
    let ts = parse_timestamp_column(ts_cells);
    if ts.parsed_fraction < 1.0 {
        log::warn!(
            "{:.1}% of {:?} did not parse as timestamps; those events sort last",
            100.0 * (1.0 - ts.parsed_fraction),
            args.timestamp
        );
    }
    let traces = build_traces(&log, &args.case, &args.activity, &ts)?;
    let params = MinerParams::default();
    let net = match args.miner {
        MinerKind::Hm => mine_heuristics(&traces, &params)?,
        MinerKind::Im => {
            let tree = mine_inductive(&traces, &params)?;
            log::info!("process tree: {tree}");
            tree_to_net(&tree)
        }
    };
    let dot = net_to_dot(&net);
    match &args.dot {
        Some(path) => write_file(path, &dot)?,
        None => print!("{dot}"),
    }
    Ok(Outcome::Done)
}

fn write_file(path: &PathBuf, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
