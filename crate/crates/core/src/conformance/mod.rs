//! Model quality metrics and cross-validated scoring of candidate combos.

mod replay;

use std::fmt;
use std::str::FromStr;
use std::sync::mpsc;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cancel::{CancelToken, Cancelled};
use crate::discovery::{
    build_traces, mine_heuristics_cancellable, mine_inductive_cancellable, tree_to_net, MinerKind, MinerParams,
    MiningError, PetriNet, TraceLog,
};
use crate::ingest::{parse_timestamp_column, EventLog, TimestampParse};
use crate::roles::Combo;

pub use replay::{generalization_from_counts, ReplayStats, Replayer, SILENT_DEPTH};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("no traces to evaluate")]
    EmptyLog,
    #[error("metric input {0} outside [0, 1]")]
    OutOfRange(f64),
}

fn replay(net: &PetriNet, traces: &TraceLog, precision: bool) -> Result<ReplayStats, MetricError> {
    if traces.is_empty() {
        return Err(MetricError::EmptyLog);
    }
    Ok(Replayer::new(net, precision)
        .replay(traces, &CancelToken::never())
        .expect("never cancelled"))
}

/// Token-replay fitness.
pub fn replay_fitness(net: &PetriNet, traces: &TraceLog) -> Result<f64, MetricError> {
    Ok(replay(net, traces, false)?.fitness())
}

/// Escaping-edges precision over markings reached by fitting events.
pub fn precision_escaping(net: &PetriNet, traces: &TraceLog) -> Result<f64, MetricError> {
    Ok(replay(net, traces, true)?.precision())
}

pub fn generalization(net: &PetriNet, traces: &TraceLog) -> Result<f64, MetricError> {
    Ok(replay(net, traces, false)?.generalization(net))
}

/// 1 / (1 + max(0, mean arc degree - 2)) over places and transitions.
pub fn simplicity(net: &PetriNet) -> f64 {
    let nodes = net.n_places() + net.transitions.len();
    if nodes == 0 {
        return 1.0;
    }
    let mean_degree = 2.0 * net.n_arcs() as f64 / nodes as f64;
    1.0 / (1.0 + (mean_degree - 2.0).max(0.0))
}

/// Weighted sum with fitness counted ten times.
pub fn combined_buijs(fitness: f64, precision: f64, generalization: f64, simplicity: f64) -> Result<f64, MetricError> {
    for v in [fitness, precision, generalization, simplicity] {
        if !(0.0..=1.0).contains(&v) {
            return Err(MetricError::OutOfRange(v));
        }
    }
    Ok((10.0 * fitness + precision + generalization + simplicity) / 13.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Fitness,
    Precision,
    Generalization,
    Simplicity,
    Buijs,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Fitness => "fitness",
            Metric::Precision => "precision",
            Metric::Generalization => "generalization",
            Metric::Simplicity => "simplicity",
            Metric::Buijs => "buijs",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "fitness" => Metric::Fitness,
            "precision" => Metric::Precision,
            "generalization" => Metric::Generalization,
            "simplicity" => Metric::Simplicity,
            "buijs" | "buijs2014" => Metric::Buijs,
            other => return Err(format!("unknown metric {other:?}")),
        })
    }
}

/// A discovery algorithm producing a replayable net.
pub trait Miner: Send + Sync {
    fn name(&self) -> &str;

    fn discover(&self, traces: &TraceLog, params: &MinerParams, cancel: &CancelToken) -> Result<PetriNet, MiningError>;
}

struct Builtin(MinerKind);

impl Miner for Builtin {
    fn name(&self) -> &str {
        self.0.name()
    }

    fn discover(&self, traces: &TraceLog, params: &MinerParams, cancel: &CancelToken) -> Result<PetriNet, MiningError> {
        match self.0 {
            MinerKind::Hm => mine_heuristics_cancellable(traces, params, cancel),
            MinerKind::Im => mine_inductive_cancellable(traces, params, cancel).map(|t| tree_to_net(&t)),
        }
    }
}

pub fn builtin_miner(kind: MinerKind) -> Arc<dyn Miner> {
    Arc::new(Builtin(kind))
}

#[derive(Clone)]
pub struct ScoreOptions {
    pub miner: Arc<dyn Miner>,
    pub metric: Metric,
    pub params: MinerParams,
    pub th_dis: Duration,
    pub th_eval: Duration,
}

impl ScoreOptions {
    pub fn new(miner: MinerKind, metric: Metric) -> Self {
        Self {
            miner: builtin_miner(miner),
            metric,
            params: MinerParams::default(),
            th_dis: Duration::from_secs(5),
            th_eval: Duration::from_secs(60),
        }
    }
}

impl Default for ScoreOptions {
    fn default() -> Self {
        Self::new(MinerKind::Hm, Metric::Generalization)
    }
}

impl fmt::Debug for ScoreOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScoreOptions")
            .field("miner", &self.miner.name())
            .field("metric", &self.metric)
            .field("params", &self.params)
            .field("th_dis", &self.th_dis)
            .field("th_eval", &self.th_eval)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TimedOut {
    pub discovery: bool,
    pub evaluation: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Elapsed {
    pub discovery_s: f64,
    pub evaluation_s: f64,
}

/// Outcome of two-fold scoring. Per-metric values are means over both directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub score: f64,
    pub metric_used: Metric,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generalization: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simplicity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub combined: Option<f64>,
    pub fold_scores: [f64; 2],
    pub timed_out: TimedOut,
    pub elapsed: Elapsed,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ScoreReport {
    pub fn zero(metric: Metric, note: impl Into<String>) -> Self {
        Self {
            score: 0.0,
            metric_used: metric,
            fitness: None,
            precision: None,
            generalization: None,
            simplicity: None,
            combined: None,
            fold_scores: [0.0, 0.0],
            timed_out: TimedOut::default(),
            elapsed: Elapsed::default(),
            note: Some(note.into()),
        }
    }

    pub fn any_timeout(&self) -> bool {
        self.timed_out.discovery || self.timed_out.evaluation
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Values {
    fitness: f64,
    precision: f64,
    generalization: f64,
    simplicity: f64,
}

struct Direction {
    score: f64,
    values: Values,
    timed_out: TimedOut,
    elapsed: Elapsed,
    note: Option<String>,
}

/// Parse the timestamp column, then score as [`score_combo_parsed`].
pub fn score_combo(log: &EventLog, combo: &Combo, opts: &ScoreOptions) -> ScoreReport {
    match log.column(&combo.timestamp) {
        Some(col) => score_combo_parsed(log, combo, &parse_timestamp_column(&col.cells), opts),
        None => ScoreReport::zero(opts.metric, format!("unknown column {:?}", combo.timestamp)),
    }
}

/// Two-fold cross-validated score of one combo; every failure maps to 0.
pub fn score_combo_parsed(log: &EventLog, combo: &Combo, ts: &TimestampParse, opts: &ScoreOptions) -> ScoreReport {
    if !combo.is_distinct() {
        return ScoreReport::zero(opts.metric, "combo repeats a column");
    }
    if ts.parsed_fraction <= 0.0 {
        return ScoreReport::zero(opts.metric, "timestamp column does not parse");
    }
    match build_traces(log, &combo.case, &combo.activity, ts) {
        Ok(traces) => score_traces(&traces, opts),
        Err(e) => ScoreReport::zero(opts.metric, e.to_string()),
    }
}

/// Cases in first-appearance order; the first half trains one direction, the rest the other.
pub fn score_traces(traces: &TraceLog, opts: &ScoreOptions) -> ScoreReport {
    let half = traces.len() / 2;
    if half == 0 {
        return ScoreReport::zero(opts.metric, "fewer than two cases");
    }
    let (a, b) = traces.split_at(half);
    let (a, b) = (Arc::new(a), Arc::new(b));
    let first = run_direction(&a, &b, opts);
    let second = run_direction(&b, &a, opts);

    let timed_out = TimedOut {
        discovery: first.timed_out.discovery || second.timed_out.discovery,
        evaluation: first.timed_out.evaluation || second.timed_out.evaluation,
    };
    let elapsed = Elapsed {
        discovery_s: first.elapsed.discovery_s + second.elapsed.discovery_s,
        evaluation_s: first.elapsed.evaluation_s + second.elapsed.evaluation_s,
    };
    let mean = |f: fn(&Values) -> f64| 0.5 * (f(&first.values) + f(&second.values));
    let metric = opts.metric;
    let show = |m: Metric| metric == m || metric == Metric::Buijs;
    let fitness = mean(|v| v.fitness);
    let precision = mean(|v| v.precision);
    let generalization = mean(|v| v.generalization);
    let simplicity = mean(|v| v.simplicity);
    let timeout = timed_out.discovery || timed_out.evaluation;
    let score = if timeout {
        0.0
    } else {
        0.5 * (first.score + second.score)
    };
    let note = first.note.or(second.note);

    ScoreReport {
        score,
        metric_used: metric,
        fitness: show(Metric::Fitness).then_some(fitness),
        precision: show(Metric::Precision).then_some(precision),
        generalization: show(Metric::Generalization).then_some(generalization),
        simplicity: show(Metric::Simplicity).then_some(simplicity),
        combined: (metric == Metric::Buijs).then_some(if timeout { 0.0 } else { score }),
        fold_scores: [first.score, second.score],
        timed_out,
        elapsed,
        note,
    }
}

/// Run `job` on its own thread; give up after `limit` and signal cancellation.
fn with_deadline<T: Send + 'static>(
    limit: Duration,
    job: impl FnOnce(CancelToken) -> T + Send + 'static,
) -> (Option<T>, f64) {
    let token = CancelToken::with_timeout(limit);
    let worker_token = token.clone();
    let (tx, rx) = mpsc::channel();
    let started = Instant::now();
    let spawned = thread::Builder::new().name("keyattr-phase".into()).spawn(move || {
        let _ = tx.send(job(worker_token));
    });
    if spawned.is_err() {
        return (None, 0.0);
    }
    let out = rx.recv_timeout(limit).ok();
    if out.is_none() {
        token.cancel();
    }
    (out, started.elapsed().as_secs_f64())
}

fn run_direction(train: &Arc<TraceLog>, test: &Arc<TraceLog>, opts: &ScoreOptions) -> Direction {
    let mut out = Direction {
        score: 0.0,
        values: Values::default(),
        timed_out: TimedOut::default(),
        elapsed: Elapsed::default(),
        note: None,
    };

    let miner = Arc::clone(&opts.miner);
    let params = opts.params;
    let fold = Arc::clone(train);
    let (mined, secs) = with_deadline(opts.th_dis, move |cancel| miner.discover(&fold, &params, &cancel));
    out.elapsed.discovery_s = secs;
    let net = match mined {
        None | Some(Err(MiningError::Cancelled(_))) => {
            out.timed_out.discovery = true;
            out.note = Some("discovery timed out".into());
            return out;
        }
        Some(Err(e)) => {
            out.note = Some(e.to_string());
            return out;
        }
        Some(Ok(net)) => Arc::new(net),
    };

    let metric = opts.metric;
    let fold = Arc::clone(test);
    let eval_net = Arc::clone(&net);
    let (evaluated, secs) = with_deadline(opts.th_eval, move |cancel| evaluate(&eval_net, &fold, metric, &cancel));
    out.elapsed.evaluation_s = secs;
    match evaluated {
        Some(Ok((score, values))) => {
            out.score = score;
            out.values = values;
        }
        _ => {
            out.timed_out.evaluation = true;
            out.note = Some("evaluation timed out".into());
        }
    }
    out
}

fn evaluate(
    net: &PetriNet,
    traces: &TraceLog,
    metric: Metric,
    cancel: &CancelToken,
) -> Result<(f64, Values), Cancelled> {
    let mut values = Values {
        simplicity: simplicity(net),
        ..Default::default()
    };
    if metric != Metric::Simplicity {
        let stats = Replayer::new(net, matches!(metric, Metric::Precision | Metric::Buijs)).replay(traces, cancel)?;
        values.fitness = stats.fitness();
        values.precision = stats.precision();
        values.generalization = stats.generalization(net);
    }
    let score = match metric {
        Metric::Fitness => values.fitness,
        Metric::Precision => values.precision,
        Metric::Generalization => values.generalization,
        Metric::Simplicity => values.simplicity,
        Metric::Buijs => combined_buijs(
            values.fitness,
            values.precision,
            values.generalization,
            values.simplicity,
        )
        .unwrap_or(0.0),
    };
    Ok((score, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discovery::{mine_inductive, ProcessTree};

    #[test]
    fn buijs_arithmetic() {
        assert_eq!(combined_buijs(1.0, 1.0, 1.0, 1.0).unwrap(), 1.0);
        assert!((combined_buijs(1.0, 0.0, 0.0, 0.0).unwrap() - 10.0 / 13.0).abs() < 1e-12);
        assert!((combined_buijs(0.0, 1.0, 1.0, 1.0).unwrap() - 3.0 / 13.0).abs() < 1e-12);
        assert_eq!(combined_buijs(1.5, 0.0, 0.0, 0.0), Err(MetricError::OutOfRange(1.5)));
    }

    #[test]
    fn simplicity_by_degree() {
        assert_eq!(simplicity(&tree_to_net(&ProcessTree::activity("a"))), 1.0);
        let mut net = PetriNet::new();
        // 2 places + 2 transitions, 6 arcs: mean degree 3.
        net.add_transition(None, vec![0, 1], vec![0, 1]);
        net.add_transition(None, vec![0], vec![1]);
        assert!((simplicity(&net) - 0.5).abs() < 1e-12);
        let mut net = PetriNet::new();
        net.add_transition(None, vec![0], vec![1]);
        net.add_transition(None, vec![1], vec![0]);
        assert_eq!(simplicity(&net), 1.0);
    }

    #[test]
    fn metrics_reject_empty_logs() {
        let net = tree_to_net(&ProcessTree::activity("a"));
        assert_eq!(replay_fitness(&net, &TraceLog::default()), Err(MetricError::EmptyLog));
    }

    #[test]
    fn im_model_fits_its_training_log() {
        let traces = TraceLog::from_traces(&[
            vec!["a", "b", "c"],
            vec!["a", "c", "b"],
            vec!["a", "d"],
            vec!["a", "d", "e", "d"],
        ]);
        let params = MinerParams {
            im_noise_threshold: 0.0,
            ..Default::default()
        };
        let net = tree_to_net(&mine_inductive(&traces, &params).unwrap());
        assert!((replay_fitness(&net, &traces).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn metric_names_parse() {
        for m in [
            Metric::Fitness,
            Metric::Precision,
            Metric::Generalization,
            Metric::Simplicity,
            Metric::Buijs,
        ] {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
        }
        assert!("nope".parse::<Metric>().is_err());
    }

    #[test]
    fn single_case_scores_zero() {
        let r = score_traces(&TraceLog::from_traces(&[vec!["a"]]), &ScoreOptions::default());
        assert_eq!(r.score, 0.0);
        assert!(r.note.is_some());
    }

    #[test]
    fn folds_are_symmetric() {
        let traces = TraceLog::from_traces(&[vec!["a", "b"], vec!["a", "b"], vec!["a", "c"], vec!["a", "b"]]);
        let opts = ScoreOptions::new(MinerKind::Im, Metric::Fitness);
        let r = score_traces(&traces, &opts);
        let swapped = traces.subset([2, 3, 0, 1]);
        let s = score_traces(&swapped, &opts);
        assert!((r.score - s.score).abs() < 1e-12);
        assert!((r.score - 0.5 * (r.fold_scores[0] + r.fold_scores[1])).abs() < 1e-12);
    }
}
