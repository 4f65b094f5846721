//! Human-readable output for `--format text`.

use std::fmt::Write;

use keyattr::pipeline::{PruneReason, Stage};
use keyattr::{IdentificationReport, Role};

use crate::commands::{Evaluation, TrainSummary};

pub fn report(r: &IdentificationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "log         {} ({} rows, {} columns)",
        r.source, r.n_rows, r.n_columns
    );
    let _ = writeln!(
        out,
        "chosen      case={}  activity={}  timestamp={}",
        r.chosen.case, r.chosen.activity, r.chosen.timestamp
    );
    match r.stage {
        Stage::Stage1Only => {
            let _ = writeln!(out, "stage       settled by the classifier (miner {})", r.miner_used);
        }
        Stage::Stage2 => {
            let _ = writeln!(
                out,
                "stage       scored {} combos with {} / {}, skipped {}",
                r.combos_scored.len(),
                r.miner_used,
                r.config.metric,
                r.combos_pruned.len()
            );
        }
    }
    let _ = writeln!(out, "candidates");
    for role in Role::ALL {
        let list: Vec<String> = r
            .candidates
            .get(role)
            .iter()
            .map(|c| format!("{} {:.3}", c.column, c.probability))
            .collect();
        let _ = writeln!(out, "  {:<10}{}", role.to_string(), list.join(", "));
    }
    if !r.combos_scored.is_empty() {
        let _ = writeln!(out, "scores");
        for sc in &r.combos_scored {
            let mark = if sc.combo == r.chosen { "*" } else { " " };
            let timeout = if sc.report.any_timeout() { "  timed out" } else { "" };
            let _ = writeln!(
                out,
                " {mark}{:<40}{:.4}{timeout}",
                sc.combo.to_string(),
                sc.report.score
            );
        }
    }
    for p in &r.combos_pruned {
        let why = match p.reason {
            PruneReason::TimestampUnparsed => format!("timestamps {:.0}% parsed", 100.0 * p.ts_parse_fraction),
            PruneReason::NoControlFlow => "no control flow".to_string(),
        };
        let _ = writeln!(out, "  {:<40}skipped: {why}", p.combo.to_string());
    }
    let _ = writeln!(
        out,
        "time        stage 1 {:.3} s, stage 2 {:.3} s",
        r.timings.stage1_s, r.timings.stage2_s
    );
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

pub fn evaluation(e: &Evaluation) -> String {
    let mut out = String::new();
    let mode = if e.holdout { "hold-out" } else { "fixed model" };
    let _ = writeln!(out, "{} logs, {mode}", e.n_logs);
    let _ = writeln!(out, "{:<24}{:>8}{:>10}{:>11}", "", "case", "activity", "timestamp");
    let _ = writeln!(
        out,
        "{:<24}{:>8.3}{:>10.3}{:>11.3}",
        "accuracy", e.accuracy.case, e.accuracy.activity, e.accuracy.timestamp
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<24}{:>10}{:>10}", "mean time (s)", "stage 1", "stage 2");
    let _ = writeln!(
        out,
        "{:<24}{:>10.3}{:>10.3}",
        "", e.mean_timings.stage1_s, e.mean_timings.stage2_s
    );
    let misses: Vec<_> = e
        .logs
        .iter()
        .filter(|l| !(l.correct.case && l.correct.activity && l.correct.timestamp))
        .collect();
    if !misses.is_empty() {
        let _ = writeln!(out);
        for l in misses {
            let _ = writeln!(out, "miss {}: chose {}, truth {}", l.source, l.chosen, l.truth);
        }
    }
    out
}

pub fn train_summary(s: &TrainSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "wrote {} from {} logs ({} columns)",
        s.model, s.n_logs, s.n_columns
    );
    let _ = writeln!(
        out,
        "positives   case {}  activity {}  timestamp {}",
        s.positives.case, s.positives.activity, s.positives.timestamp
    );
    let _ = writeln!(
        out,
        "forest      {} trees, depth {}, seed {}",
        s.hyperparameters.n_trees, s.hyperparameters.max_depth, s.seed
    );
    out
}
