use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use keyattr::conformance::{score_combo, Metric, Miner, ScoreOptions};
use keyattr::discovery::{mine_heuristics, MinerKind, MinerParams, MiningError, PetriNet, TraceLog};
use keyattr::synthgen::{generate_log, SynthConfig};
use keyattr::{identify_with, CancelToken, PipelineConfig, RoleModel};

/// Polls the token while pretending to work for a long time.
struct Polite;

impl Miner for Polite {
    fn name(&self) -> &str {
        "polite"
    }

    fn discover(&self, _: &TraceLog, _: &MinerParams, cancel: &CancelToken) -> Result<PetriNet, MiningError> {
        let start = Instant::now();
        while start.elapsed() < Duration::from_secs(10) {
            cancel.check()?;
            thread::sleep(Duration::from_millis(2));
        }
        Ok(PetriNet::new())
    }
}

/// Ignores cancellation entirely.
struct Stubborn(Duration);

impl Miner for Stubborn {
    fn name(&self) -> &str {
        "stubborn"
    }

    fn discover(&self, traces: &TraceLog, params: &MinerParams, _: &CancelToken) -> Result<PetriNet, MiningError> {
        thread::sleep(self.0);
        mine_heuristics(traces, params)
    }
}

fn options(miner: Arc<dyn Miner>, th_dis: f64, th_eval: f64) -> ScoreOptions {
    ScoreOptions {
        miner,
        metric: Metric::Fitness,
        params: MinerParams::default(),
        th_dis: Duration::from_secs_f64(th_dis),
        th_eval: Duration::from_secs_f64(th_eval),
    }
}

fn small_log() -> keyattr::LabeledLog {
    generate_log(&SynthConfig {
        seed: 5,
        n_cases: 30,
        n_distractors: 2,
        ..Default::default()
    })
}

#[test]
fn discovery_deadline_zeroes_the_score() {
    let generated = small_log();
    let start = Instant::now();
    let report = score_combo(
        &generated.log,
        &generated.labels,
        &options(Arc::new(Polite), 0.05, 60.0),
    );
    assert!(start.elapsed() < Duration::from_millis(1500));
    assert!(report.timed_out.discovery);
    assert_eq!(report.score, 0.0);
}

#[test]
fn uncooperative_miner_is_abandoned_at_the_deadline() {
    let generated = small_log();
    let start = Instant::now();
    let report = score_combo(
        &generated.log,
        &generated.labels,
        &options(Arc::new(Stubborn(Duration::from_secs(3))), 0.05, 60.0),
    );
    assert!(start.elapsed() < Duration::from_millis(1500), "{:?}", start.elapsed());
    assert!(report.timed_out.discovery);
    assert_eq!(report.score, 0.0);
}

#[test]
fn fast_miner_within_deadline_scores_normally() {
    let generated = small_log();
    let report = score_combo(
        &generated.log,
        &generated.labels,
        &options(Arc::new(Stubborn(Duration::from_millis(1))), 5.0, 60.0),
    );
    assert!(!report.any_timeout());
    assert!(report.score > 0.5, "{report:?}");
}

#[test]
fn evaluation_deadline_zeroes_the_score() {
    let generated = generate_log(&SynthConfig {
        seed: 9,
        n_cases: 3000,
        n_distractors: 0,
        tree_depth: 3,
        ..Default::default()
    });
    let opts = ScoreOptions {
        th_eval: Duration::from_micros(50),
        ..ScoreOptions::new(MinerKind::Hm, Metric::Precision)
    };
    let report = score_combo(&generated.log, &generated.labels, &opts);
    assert!(report.timed_out.evaluation, "{report:?}");
    assert_eq!(report.score, 0.0);
}

#[test]
fn pipeline_falls_back_when_every_combo_times_out() {
    let generated = small_log();
    let mut corpus = keyattr::TrainingCorpus::new();
    for seed in 100..106 {
        let l = generate_log(&SynthConfig {
            seed,
            n_cases: 20,
            ..Default::default()
        });
        corpus.add_log(&l.log, &l.labels, 1000);
    }
    let model: RoleModel = keyattr::train(&corpus, &Default::default(), 1).unwrap();
    let config = PipelineConfig {
        k: 3,
        th_dis: 0.02,
        ..Default::default()
    };
    let opts = ScoreOptions {
        th_dis: Duration::from_millis(20),
        ..options(Arc::new(Polite), 0.02, 60.0)
    };
    let report = identify_with(&generated.log, &model, &config, &opts).unwrap();
    assert!(!report.combos_scored.is_empty());
    assert!(report
        .combos_scored
        .iter()
        .all(|c| c.report.timed_out.discovery && c.report.score == 0.0));
    assert!(report.fallback);
    assert!(!report.warnings.is_empty());
    assert!(report.chosen.is_distinct());
    assert_eq!(report.miner_used, "polite");
}
