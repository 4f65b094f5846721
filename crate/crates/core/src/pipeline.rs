//! Two-stage identification: classify columns, then score surviving combos.

use std::collections::HashMap;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{
    predict, select_candidates, CandidateSet, ClassifierError, ColumnProbabilities, RoleModel, DEFAULT_TIE_EPSILON,
};
use crate::conformance::{builtin_miner, score_combo_parsed, Metric, ScoreOptions, ScoreReport};
use crate::discovery::{build_traces, MinerKind, MinerParams};
use crate::features::featurize_log;
use crate::ingest::{parse_timestamp_column, EventLog, TimestampParse};
use crate::roles::{Combo, Role};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const STAGE1_MINER: &str = "NA";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub k: usize,
    pub n_rows: usize,
    pub miner: MinerKind,
    pub metric: Metric,
    /// Seconds.
    pub th_dis: f64,
    /// Seconds.
    pub th_eval: f64,
    pub min_ts_parse_fraction: f64,
    /// Skip combos whose traces never show one activity followed by a different one.
    pub skip_flat_combos: bool,
    pub seed: u64,
    pub tie_epsilon: f64,
    /// Parallel combo evaluations; `None` uses every core.
    #[serde(skip)]
    pub jobs: Option<usize>,
    pub params: MinerParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            k: 2,
            n_rows: 1000,
            miner: MinerKind::Hm,
            metric: Metric::Generalization,
            th_dis: 5.0,
            th_eval: 60.0,
            min_ts_parse_fraction: 0.9,
            skip_flat_combos: true,
            seed: 0,
            tie_epsilon: DEFAULT_TIE_EPSILON,
            jobs: None,
            params: MinerParams::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |msg: String| Err(PipelineError::Config(msg));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.n_rows == 0 {
            return bad("row limit must be at least 1".into());
        }
        if !(self.th_dis > 0.0 && self.th_eval > 0.0) || !self.th_dis.is_finite() || !self.th_eval.is_finite() {
            return bad(format!(
                "timeouts must be positive, got {} and {}",
                self.th_dis, self.th_eval
            ));
        }
        if !(0.0..=1.0).contains(&self.min_ts_parse_fraction) {
            return bad(format!(
                "minimum parse fraction {} outside [0, 1]",
                self.min_ts_parse_fraction
            ));
        }
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1".into());
        }
        self.params.validate().map_err(PipelineError::Config)
    }

    pub fn score_options(&self) -> ScoreOptions {
        ScoreOptions {
            miner: builtin_miner(self.miner),
            metric: self.metric,
            params: self.params,
            th_dis: Duration::from_secs_f64(self.th_dis),
            th_eval: Duration::from_secs_f64(self.th_eval),
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("log has {0} columns; at least 3 are needed")]
    TooFewColumns(usize),
    #[error(transparent)]
    Model(#[from] ClassifierError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Stage1Only,
    Stage2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCombo {
    pub combo: Combo,
    pub report: ScoreReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrunedCombo {
    pub combo: Combo,
    pub reason: PruneReason,
    pub ts_parse_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PruneReason {
    TimestampUnparsed,
    NoControlFlow,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub stage1_s: f64,
    pub stage2_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationReport {
    pub schema_version: u32,
    pub source: String,
    pub n_rows: usize,
    pub n_columns: usize,
    pub config: PipelineConfig,
    pub probabilities: Vec<ColumnProbabilities>,
    pub candidates: CandidateSet,
    pub planned_evaluations: usize,
    pub combos_scored: Vec<ScoredCombo>,
    pub combos_pruned: Vec<PrunedCombo>,
    pub chosen: Combo,
    pub stage: Stage,
    pub miner_used: String,
    pub fallback: bool,
    pub timings: Timings,
    pub warnings: Vec<String>,
}

/// Every distinct-column combo in rank order (case, then activity, then timestamp).
pub fn enumerate_combos(candidates: &CandidateSet) -> Vec<Combo> {
    let mut out = Vec::new();
    for c in &candidates.case {
        for a in &candidates.activity {
            for t in &candidates.timestamp {
                let combo = Combo::new(&c.column, &a.column, &t.column);
                if combo.is_distinct() {
                    out.push(combo);
                }
            }
        }
    }
    out
}

/// Whether stage one alone settles the answer.
pub fn is_stage1_only(candidates: &CandidateSet) -> bool {
    let single = Role::ALL.iter().all(|&r| candidates.get(r).len() == 1);
    single
        && Combo::new(
            &candidates.case[0].column,
            &candidates.activity[0].column,
            &candidates.timestamp[0].column,
        )
        .is_distinct()
}

/// Combos stage two would mine, assuming every timestamp candidate parses.
pub fn count_planned_evaluations(candidates: &CandidateSet) -> usize {
    if is_stage1_only(candidates) {
        0
    } else {
        enumerate_combos(candidates).len()
    }
}

pub fn identify(
    log: &EventLog,
    model: &RoleModel,
    config: &PipelineConfig,
) -> Result<IdentificationReport, PipelineError> {
    identify_with(log, model, config, &config.score_options())
}

/// As [`identify`] with explicit scoring options (for example a custom miner).
pub fn identify_with(
    log: &EventLog,
    model: &RoleModel,
    config: &PipelineConfig,
    opts: &ScoreOptions,
) -> Result<IdentificationReport, PipelineError> {
    config.validate()?;
    if log.n_columns() < 3 {
        return Err(PipelineError::TooFewColumns(log.n_columns()));
    }
    model.validate()?;

    let stage1_start = Instant::now();
    let log = log.truncated(config.n_rows);
    let probabilities: Vec<ColumnProbabilities> = featurize_log(&log)
        .into_iter()
        .map(|(column, fv)| ColumnProbabilities {
            probabilities: predict(model, &fv),
            column,
        })
        .collect();
    let candidates = select_candidates(&probabilities, config.k, config.tie_epsilon);
    let stage1_s = stage1_start.elapsed().as_secs_f64();

    let mut warnings = Vec::new();
    if log.ragged_rows() > 0 {
        warnings.push(format!("{} ragged rows were padded or cut", log.ragged_rows()));
    }
    let mut report = IdentificationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        source: display_source(log.source()),
        n_rows: log.n_rows(),
        n_columns: log.n_columns(),
        config: config.clone(),
        probabilities,
        planned_evaluations: 0,
        combos_scored: Vec::new(),
        combos_pruned: Vec::new(),
        chosen: Combo::new("", "", ""),
        stage: Stage::Stage1Only,
        miner_used: STAGE1_MINER.to_string(),
        fallback: false,
        timings: Timings {
            stage1_s,
            stage2_s: 0.0,
        },
        warnings,
        candidates,
    };

    if is_stage1_only(&report.candidates) {
        let c = &report.candidates;
        report.chosen = Combo::new(&c.case[0].column, &c.activity[0].column, &c.timestamp[0].column);
        log::info!("stage one settled {}", report.chosen);
        return Ok(report);
    }

    let stage2_start = Instant::now();
    report.stage = Stage::Stage2;
    report.miner_used = opts.miner.name().to_string();

    let mut parsed: HashMap<String, TimestampParse> = HashMap::new();
    for cand in &report.candidates.timestamp {
        let cells = &log.column(&cand.column).expect("candidate exists").cells;
        parsed
            .entry(cand.column.clone())
            .or_insert_with(|| parse_timestamp_column(cells));
    }
    let mut to_score = Vec::new();
    for combo in enumerate_combos(&report.candidates) {
        let fraction = parsed[&combo.timestamp].parsed_fraction;
        if fraction < config.min_ts_parse_fraction || fraction == 0.0 {
            report.combos_pruned.push(PrunedCombo {
                combo,
                reason: PruneReason::TimestampUnparsed,
                ts_parse_fraction: fraction,
            });
        } else if config.skip_flat_combos && is_flat(&log, &combo, &parsed[&combo.timestamp]) {
            report.combos_pruned.push(PrunedCombo {
                combo,
                reason: PruneReason::NoControlFlow,
                ts_parse_fraction: fraction,
            });
        } else {
            to_score.push(combo);
        }
    }
    report.planned_evaluations = to_score.len();

    let score_one = |combo: &Combo| {
        let r = score_combo_parsed(&log, combo, &parsed[&combo.timestamp], opts);
        log::info!(
            "scored {combo}: {:.4}{}",
            r.score,
            if r.any_timeout() { " (timed out)" } else { "" }
        );
        r
    };
    let reports: Vec<ScoreReport> = match config.jobs {
        Some(1) => to_score.iter().map(score_one).collect(),
        jobs => {
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(n) = jobs {
                builder = builder.num_threads(n);
            }
            match builder.build() {
                Ok(pool) => pool.install(|| to_score.par_iter().map(score_one).collect()),
                Err(_) => to_score.iter().map(score_one).collect(),
            }
        }
    };
    report.combos_scored = to_score
        .into_iter()
        .zip(reports)
        .map(|(combo, report)| ScoredCombo { combo, report })
        .collect();

    let stage1_product = |combo: &Combo| -> f64 {
        Role::ALL
            .iter()
            .map(|&r| {
                report
                    .probabilities
                    .iter()
                    .find(|p| p.column == combo.get(r))
                    .map_or(0.0, |p| p.probabilities.get(r))
            })
            .product()
    };
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, sc) in report.combos_scored.iter().enumerate() {
        let score = sc.report.score;
        let product = stage1_product(&sc.combo);
        let better = match best {
            None => true,
            Some((_, s, p)) => score > s + 1e-12 || ((score - s).abs() <= 1e-12 && product > p + 1e-12),
        };
        if better {
            best = Some((i, score, product));
        }
    }
    match best {
        Some((i, score, _)) if score > 0.0 => report.chosen = report.combos_scored[i].combo.clone(),
        _ => {
            report.chosen = greedy_assignment(&report.probabilities);
            report.fallback = true;
            report.warnings.push(format!(
                "no candidate combination scored above 0; falling back to the stage-one best guess {}",
                report.chosen
            ));
            log::warn!("{}", report.warnings.last().expect("just pushed"));
        }
    }
    report.timings.stage2_s = stage2_start.elapsed().as_secs_f64();
    Ok(report)
}

/// True when no trace has two consecutive events with different activities:
/// every case is a single event or repeats one activity.
pub fn is_flat(log: &EventLog, combo: &Combo, ts: &TimestampParse) -> bool {
    match build_traces(log, &combo.case, &combo.activity, ts) {
        Ok(traces) => !traces.traces.iter().any(|t| t.windows(2).any(|w| w[0] != w[1])),
        Err(_) => false,
    }
}

/// Highest-probability (role, column) pairs first, each role and column used once.
pub fn greedy_assignment(probabilities: &[ColumnProbabilities]) -> Combo {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (ci, col) in probabilities.iter().enumerate() {
        for role in Role::ALL {
            pairs.push((col.probabilities.get(role), role.index(), ci));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut chosen: [Option<usize>; 3] = [None; 3];
    let mut used = vec![false; probabilities.len()];
    for (_, role, ci) in pairs {
        if chosen[role].is_none() && !used[ci] {
            chosen[role] = Some(ci);
            used[ci] = true;
        }
    }
    let name = |r: usize| chosen[r].map_or_else(String::new, |ci| probabilities[ci].column.clone());
    Combo::new(name(0), name(1), name(2))
}

fn display_source(source: &str) -> String {
    Path::new(source)
        .file_name()
        .map_or_else(|| source.to_string(), |n| n.to_string_lossy().into_owned())
}
