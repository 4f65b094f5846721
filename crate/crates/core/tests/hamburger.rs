use std::collections::BTreeMap;
use std::path::PathBuf;

use keyattr::conformance::{score_combo, Metric, ScoreOptions};
use keyattr::discovery::{dfg_to_dot, mine_heuristics, net_to_dot, MinerKind, MinerParams};
use keyattr::{build_dfg, build_traces, featurize_log, load_csv, parse_timestamp_column, Combo, EventLog};

fn hamburger() -> EventLog {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/hamburger.csv");
    load_csv(path, 1000).unwrap()
}

fn owned(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

const CASE_1337: [&str; 7] = [
    "Take Order",
    "Note Address",
    "Note Payment Method",
    "Prepare Burger",
    "Grab Soda",
    "Wrap Order",
    "Deliver Order",
];
const CASE_1338: [&str; 7] = [
    "Take Order",
    "Note Address",
    "Note Payment Method",
    "Grab Soda",
    "Prepare Burger",
    "Wrap Order",
    "Wait for pickup",
];

#[test]
fn loads_fourteen_rows() {
    let log = hamburger();
    assert_eq!(log.n_rows(), 14);
    assert_eq!(
        log.column_names().collect::<Vec<_>>(),
        vec!["ID", "Activity", "Datetime"]
    );
    assert_eq!(log.ragged_rows(), 0);
}

#[test]
fn datetime_column_parses_and_orders() {
    let log = hamburger();
    let ts = parse_timestamp_column(&log.column("Datetime").unwrap().cells);
    assert_eq!(ts.parsed_fraction, 1.0);
    let keys: Vec<i64> = ts.keys.iter().map(|k| k.unwrap()).collect();
    assert!(keys[0] < keys[1]);
    // 1:41PM sorts before 1:42PM even though it appears later.
    assert!(keys[4] < keys[3]);
    // 2:00PM is the latest event.
    assert_eq!(keys.iter().max(), Some(&keys[13]));
}

#[test]
fn datetime_features_are_digit_and_symbol_heavy() {
    let features = featurize_log(&hamburger());
    assert_eq!(features.len(), 3);
    let (_, fv) = features.iter().find(|(n, _)| n == "Datetime").unwrap();
    assert!(fv.f_digits > 0.4, "{fv:?}");
    assert!(fv.f_symbols > 0.1, "{fv:?}");
}

#[test]
fn traces_match_hand_sorted_cases() {
    let log = hamburger();
    let ts = parse_timestamp_column(&log.column("Datetime").unwrap().cells);
    let traces = build_traces(&log, "ID", "Activity", &ts).unwrap();
    assert_eq!(traces.case_ids, owned(&["1337", "1338"]));
    assert_eq!(traces.traces, vec![owned(&CASE_1337), owned(&CASE_1338)]);
}

#[test]
fn dfg_matches_adjacency_count() {
    let log = hamburger();
    let ts = parse_timestamp_column(&log.column("Datetime").unwrap().cells);
    let traces = build_traces(&log, "ID", "Activity", &ts).unwrap();
    let dfg = build_dfg(&traces);

    let mut expected: BTreeMap<(String, String), usize> = BTreeMap::new();
    for trace in [CASE_1337, CASE_1338] {
        for pair in trace.windows(2) {
            *expected.entry((pair[0].to_string(), pair[1].to_string())).or_default() += 1;
        }
    }
    for ((a, b), count) in &expected {
        assert_eq!(dfg.edge(a, b), *count, "{a} -> {b}");
    }
    assert_eq!(dfg.edge("Take Order", "Note Address"), 2);
    assert_eq!(dfg.edge("Prepare Burger", "Grab Soda"), 1);
    assert_eq!(dfg.edge("Grab Soda", "Prepare Burger"), 1);
    assert_eq!(dfg.edge("Note Address", "Take Order"), 0);
    assert_eq!(dfg.n_activities(), 8);
}

#[test]
fn dot_exports_name_the_activities() {
    let log = hamburger();
    let ts = parse_timestamp_column(&log.column("Datetime").unwrap().cells);
    let traces = build_traces(&log, "ID", "Activity", &ts).unwrap();
    let dfg_dot = dfg_to_dot(&build_dfg(&traces));
    for activity in CASE_1337.iter().chain(CASE_1338.iter()) {
        assert!(dfg_dot.contains(activity), "{activity}");
    }
    let net = mine_heuristics(&traces, &MinerParams::default()).unwrap();
    let net_dot = net_to_dot(&net);
    assert!(net_dot.starts_with("digraph"));
    assert!(net_dot.contains("Take Order"));
}

#[test]
fn correct_combo_scores_positive_fitness() {
    let log = hamburger();
    let opts = ScoreOptions::new(MinerKind::Hm, Metric::Fitness);
    let report = score_combo(&log, &Combo::new("ID", "Activity", "Datetime"), &opts);
    assert!(!report.any_timeout());
    assert!(report.score > 0.0 && report.score <= 1.0, "{report:?}");
    assert!(report.fold_scores.iter().all(|s| (0.0..=1.0).contains(s)));
}
