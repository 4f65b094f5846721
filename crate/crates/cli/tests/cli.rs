use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn keyattr(args: &[&str]) -> Output {
    keyattr_env(args, &[])
}

fn keyattr_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_keyattr"));
    cmd.args(args).env_remove("KEYATTR_JOBS").env_remove("RUST_LOG");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not one JSON document ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/hamburger.csv")
}

fn generate(dir: &Path, count: usize, seed: u64, distractors: usize) {
    let out = keyattr(&[
        "generate",
        "--out",
        s(dir),
        "--count",
        &count.to_string(),
        "--seed",
        &seed.to_string(),
        "--distractors",
        &distractors.to_string(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

fn labels(dir: &Path, i: usize) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("log_{i}.labels.json"))).unwrap()).unwrap()
}

fn files_with_suffix(dir: &Path, suffix: &str) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(suffix))
        .collect();
    names.sort();
    names
}

#[test]
fn generate_writes_csv_and_label_pairs() {
    let tmp = TempDir::new().unwrap();
    generate(tmp.path(), 5, 3, 8);
    assert_eq!(files_with_suffix(tmp.path(), ".csv").len(), 5);
    assert_eq!(files_with_suffix(tmp.path(), ".labels.json").len(), 5);
}

#[test]
fn generate_is_reproducible() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    generate(a.path(), 3, 11, 8);
    generate(b.path(), 3, 11, 8);
    for name in files_with_suffix(a.path(), "") {
        assert_eq!(
            fs::read(a.path().join(&name)).unwrap(),
            fs::read(b.path().join(&name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn generate_honours_distractor_count() {
    let tmp = TempDir::new().unwrap();
    generate(tmp.path(), 2, 5, 12);
    for name in files_with_suffix(tmp.path(), ".csv") {
        let text = fs::read_to_string(tmp.path().join(name)).unwrap();
        assert_eq!(text.lines().next().unwrap().split(',').count(), 15);
    }
}

#[test]
fn generate_into_unwritable_location_fails() {
    let tmp = TempDir::new().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = keyattr(&["generate", "--out", s(&blocker.join("sub")), "--count", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn train_writes_identical_models_for_identical_seeds() {
    let tmp = TempDir::new().unwrap();
    let corpus = tmp.path().join("corpus");
    generate(&corpus, 20, 100, 8);
    let (m1, m2) = (tmp.path().join("m1.json"), tmp.path().join("m2.json"));
    for m in [&m1, &m2] {
        let out = keyattr(&[
            "train",
            "--corpus",
            s(&corpus),
            "--model",
            s(m),
            "--seed",
            "5",
            "--format",
            "json",
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let summary = json(&out);
        assert_eq!(summary["n_logs"], 20);
        assert_eq!(summary["positives"]["case"], 20);
        assert_eq!(summary["model"], if m == &m1 { "m1.json" } else { "m2.json" });
    }
    assert_eq!(fs::read(&m1).unwrap(), fs::read(&m2).unwrap());
}

#[test]
fn train_rejects_empty_and_unlabeled_corpora() {
    let tmp = TempDir::new().unwrap();
    let model = tmp.path().join("m.json");
    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    assert_eq!(
        code(&keyattr(&["train", "--corpus", s(&empty), "--model", s(&model)])),
        2
    );

    let corpus = tmp.path().join("corpus");
    generate(&corpus, 2, 1, 8);
    fs::remove_file(corpus.join("log_1.labels.json")).unwrap();
    let out = keyattr(&["train", "--corpus", s(&corpus), "--model", s(&model)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("log_1.csv"));
    assert!(!model.exists());
}

#[test]
fn train_rejects_zero_trees_as_usage_error() {
    let tmp = TempDir::new().unwrap();
    generate(tmp.path(), 1, 1, 8);
    let out = keyattr(&[
        "train",
        "--corpus",
        s(tmp.path()),
        "--model",
        s(&tmp.path().join("m")),
        "--trees",
        "0",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn identify_recovers_generated_labels() {
    let tmp = TempDir::new().unwrap();
    generate(tmp.path(), 1, 4242, 3);
    let out = keyattr(&["identify", "--log", s(&tmp.path().join("log_0.csv"))]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert_eq!(report["chosen"], labels(tmp.path(), 0));
    assert_eq!(report["source"], "log_0.csv");
    assert_eq!(report["schema_version"], 1);
}

#[test]
fn identify_at_k1_settles_in_stage_one() {
    let tmp = TempDir::new().unwrap();
    generate(tmp.path(), 1, 4242, 3);
    let out = keyattr(&["identify", "--log", s(&tmp.path().join("log_0.csv")), "--k", "1"]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["stage"], "stage1-only");
    assert_eq!(report["miner_used"], "NA");
    assert_eq!(report["combos_scored"].as_array().unwrap().len(), 0);
}

#[test]
fn identify_text_format_names_the_choice() {
    let out = keyattr(&["identify", "--log", s(&fixture()), "--format", "text"]);
    assert!(matches!(code(&out), 0 | 3));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("chosen"));
    assert!(text.contains("hamburger.csv"));
}

#[test]
fn identify_input_errors_exit_2() {
    assert_eq!(code(&keyattr(&["identify", "--log", "/no/such/log.csv"])), 2);
    let tmp = TempDir::new().unwrap();
    let narrow = tmp.path().join("narrow.csv");
    fs::write(&narrow, "a,b\n1,2\n3,4\n").unwrap();
    assert_eq!(code(&keyattr(&["identify", "--log", s(&narrow)])), 2);
    let bad_model = tmp.path().join("model.json");
    fs::write(&bad_model, "{\"schema_version\": 99}").unwrap();
    assert_eq!(
        code(&keyattr(&[
            "identify",
            "--log",
            s(&fixture()),
            "--model",
            s(&bad_model)
        ])),
        2
    );
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&keyattr(&["identify"])), 1);
    assert_eq!(code(&keyattr(&["identify", "--log", s(&fixture()), "--bogus"])), 1);
    assert_eq!(code(&keyattr(&["identify", "--log", s(&fixture()), "--k", "0"])), 1);
    assert_eq!(
        code(&keyattr(&["identify", "--log", s(&fixture()), "--miner", "alpha"])),
        1
    );
    assert_eq!(
        code(&keyattr(&["identify", "--log", s(&fixture()), "--th-dis", "-1"])),
        1
    );
    assert_eq!(code(&keyattr(&["--help"])), 0);
}

#[test]
fn jobs_falls_back_to_environment() {
    let log = fixture();
    let args = ["identify", "--log", s(&log)];
    assert_eq!(code(&keyattr_env(&args, &[("KEYATTR_JOBS", "0")])), 1);
    assert!(matches!(code(&keyattr_env(&args, &[("KEYATTR_JOBS", "2")])), 0 | 3));
}

#[test]
fn fallback_exits_3() {
    let tmp = TempDir::new().unwrap();
    generate(tmp.path(), 1, 77, 8);
    let out = keyattr(&[
        "identify",
        "--log",
        s(&tmp.path().join("log_0.csv")),
        "--k",
        "3",
        "--th-dis",
        "0.000000001",
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stdout));
    let report = json(&out);
    assert_eq!(report["fallback"], true);
    assert!(!report["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn evaluate_reports_accuracies_and_timings() {
    let tmp = TempDir::new().unwrap();
    generate(tmp.path(), 20, 600, 8);
    let out = keyattr(&["evaluate", "--corpus", s(tmp.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let e = json(&out);
    assert_eq!(e["n_logs"], 20);
    for role in ["case", "activity", "timestamp"] {
        let a = e["accuracy"][role].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&a));
    }
    assert!(e["mean_timings"]["stage1_s"].as_f64().unwrap() >= 0.0);
    assert!(e["mean_timings"]["stage2_s"].as_f64().unwrap() >= 0.0);

    let text = keyattr(&["evaluate", "--corpus", s(tmp.path()), "--format", "text"]);
    let text = String::from_utf8_lossy(&text.stdout);
    assert!(text.contains("stage 1") && text.contains("stage 2"));
}

#[test]
fn evaluate_single_log_with_its_own_model() {
    let tmp = TempDir::new().unwrap();
    let corpus = tmp.path().join("corpus");
    generate(&corpus, 1, 9, 8);
    let model = tmp.path().join("m.json");
    assert_eq!(
        code(&keyattr(&["train", "--corpus", s(&corpus), "--model", s(&model)])),
        0
    );
    let out = keyattr(&["evaluate", "--corpus", s(&corpus), "--model", s(&model)]);
    assert_eq!(code(&out), 0);
    let e = json(&out);
    for role in ["case", "activity", "timestamp"] {
        let a = e["accuracy"][role].as_f64().unwrap();
        assert!(a == 0.0 || a == 1.0);
    }
}

#[test]
fn evaluate_is_repeatable() {
    let tmp = TempDir::new().unwrap();
    generate(tmp.path(), 4, 123, 8);
    let run = || {
        let mut v = json(&keyattr(&[
            "evaluate",
            "--corpus",
            s(tmp.path()),
            "--holdout",
            "--trees",
            "20",
        ]));
        v.as_object_mut().unwrap().remove("mean_timings");
        for log in v["logs"].as_array_mut().unwrap() {
            log.as_object_mut().unwrap().remove("timings");
        }
        v
    };
    assert_eq!(run(), run());
}

#[test]
fn discover_writes_dot_for_the_hamburger_log() {
    let tmp = TempDir::new().unwrap();
    let dot = tmp.path().join("model.dot");
    let out = keyattr(&[
        "discover",
        "--log",
        s(&fixture()),
        "--case",
        "ID",
        "--activity",
        "Activity",
        "--timestamp",
        "Datetime",
        "--miner",
        "hm",
        "--dot",
        s(&dot),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph"));
    assert!(text.contains("Take Order"));
}

#[test]
fn discover_rejects_unknown_columns() {
    for (case, activity, timestamp) in [("Nope", "Activity", "Datetime"), ("ID", "Activity", "When")] {
        let out = keyattr(&[
            "discover",
            "--log",
            s(&fixture()),
            "--case",
            case,
            "--activity",
            activity,
            "--timestamp",
            timestamp,
        ]);
        assert_eq!(code(&out), 2);
    }
}

#[test]
fn discover_single_activity_log_with_im() {
    let tmp = TempDir::new().unwrap();
    let log = tmp.path().join("one.csv");
    fs::write(
        &log,
        "case,act,ts\n1,work,2021-01-01 10:00:00\n2,work,2021-01-01 11:00:00\n3,work,2021-01-01 12:00:00\n",
    )
    .unwrap();
    let out = keyattr(&[
        "discover",
        "--log",
        s(&log),
        "--case",
        "case",
        "--activity",
        "act",
        "--timestamp",
        "ts",
        "--miner",
        "im",
    ]);
    assert_eq!(code(&out), 0);
    let dot = String::from_utf8_lossy(&out.stdout);
    let visible = dot
        .lines()
        .filter(|l| l.contains("shape=box, label=\"") && !l.contains("label=\"\""))
        .count();
    assert_eq!(visible, 1, "{dot}");
}
