//! Seeded generator of labeled event logs with distractor columns.

mod words;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discovery::ProcessTree;
use crate::ingest::{EventLog, TimestampFormat};
use crate::roles::Combo;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseFormat {
    Numeric,
    Prefixed,
    UuidLike,
}

impl CaseFormat {
    pub const ALL: [CaseFormat; 3] = [CaseFormat::Numeric, CaseFormat::Prefixed, CaseFormat::UuidLike];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_cases: usize,
    pub tree_depth: usize,
    pub n_distractors: usize,
    pub case_format: CaseFormat,
    pub ts_format: TimestampFormat,
    pub shuffle_columns: bool,
    pub min_activities: usize,
    pub max_activities: usize,
    /// Chance of another redo iteration each time a loop body completes.
    pub loop_repeat: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_cases: 100,
            tree_depth: 3,
            n_distractors: 8,
            case_format: CaseFormat::Numeric,
            ts_format: TimestampFormat::Iso8601,
            shuffle_columns: true,
            min_activities: 3,
            max_activities: 10,
            loop_repeat: 0.3,
        }
    }
}

/// A generated log with its ground-truth key columns and generating model.
#[derive(Debug, Clone)]
pub struct LabeledLog {
    pub log: EventLog,
    pub labels: Combo,
    pub tree: ProcessTree,
}

const MAX_LOOP_REPEATS: usize = 3;

pub fn generate_log(config: &SynthConfig) -> LabeledLog {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n_cases = config.n_cases.max(2);

    let lo = config.min_activities.max(1);
    let hi = config.max_activities.max(lo);
    let n_acts = rng.gen_range(lo..=hi);
    let activities = activity_names(n_acts, &mut rng);
    let tree = random_tree(&activities, config.tree_depth.max(1), &mut rng);

    let epoch_day = NaiveDate::from_ymd_opt(2015, 1, 1).expect("valid date");
    let base_day = epoch_day + chrono::Days::new(rng.gen_range(0..3000));
    let base_ms = base_day
        .and_hms_opt(8, 0, 0)
        .expect("valid time")
        .and_utc()
        .timestamp_millis();

    // (instant, case, position, activity)
    let mut events: Vec<(i64, usize, usize, String)> = Vec::new();
    for case in 0..n_cases {
        let mut trace = Vec::new();
        while trace.is_empty() {
            playout(&tree, config.loop_repeat, &mut rng, &mut trace);
        }
        let mut t = base_ms + rng.gen_range(0..90 * 86_400) * 1000;
        for (pos, act) in trace.into_iter().enumerate() {
            if pos > 0 {
                t += rng.gen_range(1..=600) * 1000;
            }
            events.push((t, case, pos, act));
        }
    }
    events.sort_by_key(|e| (e.0, e.1, e.2));

    let case_ids = case_names(n_cases, config.case_format, &mut rng);
    let mut columns: Vec<(String, Vec<String>)> = vec![
        ("case".into(), events.iter().map(|e| case_ids[e.1].clone()).collect()),
        ("activity".into(), events.iter().map(|e| e.3.clone()).collect()),
        (
            "timestamp".into(),
            events.iter().map(|e| config.ts_format.render(e.0)).collect(),
        ),
    ];
    let case_of_row: Vec<usize> = events.iter().map(|e| e.1).collect();
    for i in 0..config.n_distractors {
        columns.push((format!("distractor{i}"), distractor(&case_of_row, n_cases, &mut rng)));
    }
    if config.shuffle_columns {
        columns.shuffle(&mut rng);
    }

    let mut labels = Combo::new("", "", "");
    let mut named = Vec::with_capacity(columns.len());
    for (i, (role, cells)) in columns.into_iter().enumerate() {
        let name = format!("col{:02}", i + 1);
        match role.as_str() {
            "case" => labels.case = name.clone(),
            "activity" => labels.activity = name.clone(),
            "timestamp" => labels.timestamp = name.clone(),
            _ => {}
        }
        named.push((name, cells));
    }
    let log = EventLog::from_columns(named, "synthetic").expect("generated log is rectangular");
    LabeledLog { log, labels, tree }
}

/// Log `i` uses seed `base_seed + i`; timestamp and case formats cycle.
pub fn generate_corpus(base_seed: u64, count: usize, template: &SynthConfig) -> Vec<LabeledLog> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let config = SynthConfig {
                seed: base_seed.wrapping_add(i as u64),
                ts_format: TimestampFormat::ALL[i % TimestampFormat::ALL.len()],
                case_format: CaseFormat::ALL[i % CaseFormat::ALL.len()],
                ..template.clone()
            };
            generate_log(&config)
        })
        .collect()
}

fn activity_names(n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let style = rng.gen_range(0..3);
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    while pairs.len() < n {
        let pair = (*words::VERBS.choose(rng).unwrap(), *words::NOUNS.choose(rng).unwrap());
        if !pairs.contains(&pair) {
            pairs.push(pair);
        }
    }
    pairs
        .into_iter()
        .map(|(v, o)| match style {
            0 => format!("{} {}", capitalize(v), capitalize(o)),
            1 => format!("{v}_{o}"),
            _ => format!("{}{}", capitalize(v), capitalize(o)),
        })
        .collect()
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Random block-structured tree using every activity exactly once.
pub fn random_tree(activities: &[String], depth: usize, rng: &mut ChaCha8Rng) -> ProcessTree {
    if activities.len() == 1 {
        return ProcessTree::activity(activities[0].clone());
    }
    let roll: f64 = rng.gen();
    let make_loop = roll >= 0.85;
    let parts = if depth <= 1 {
        activities.iter().map(|a| vec![a.clone()]).collect()
    } else {
        let k = if make_loop {
            2
        } else {
            rng.gen_range(2..=activities.len().min(4))
        };
        let mut cuts: Vec<usize> = (1..activities.len()).collect();
        cuts.shuffle(rng);
        let mut cuts: Vec<usize> = cuts.into_iter().take(k - 1).collect();
        cuts.sort_unstable();
        let mut parts = Vec::new();
        let mut from = 0;
        for c in cuts.into_iter().chain([activities.len()]) {
            parts.push(activities[from..c].to_vec());
            from = c;
        }
        parts
    };
    let children: Vec<ProcessTree> = parts
        .iter()
        .map(|p| random_tree(p, depth.saturating_sub(1), rng))
        .collect();
    if make_loop {
        ProcessTree::Loop(children)
    } else if roll < 0.4 {
        ProcessTree::Sequence(children)
    } else if roll < 0.65 {
        ProcessTree::Xor(children)
    } else {
        ProcessTree::Parallel(children)
    }
}

/// Append one random execution of `tree` to `out`.
pub fn playout(tree: &ProcessTree, loop_repeat: f64, rng: &mut ChaCha8Rng, out: &mut Vec<String>) {
    match tree {
        ProcessTree::Activity(a) => out.push(a.clone()),
        ProcessTree::Silent => {}
        ProcessTree::Sequence(c) => c.iter().for_each(|t| playout(t, loop_repeat, rng, out)),
        ProcessTree::Xor(c) => {
            let pick = rng.gen_range(0..c.len());
            playout(&c[pick], loop_repeat, rng, out);
        }
        ProcessTree::Parallel(c) => {
            let mut branches: Vec<std::collections::VecDeque<String>> = c
                .iter()
                .map(|t| {
                    let mut b = Vec::new();
                    playout(t, loop_repeat, rng, &mut b);
                    b.into()
                })
                .collect();
            loop {
                let remaining: usize = branches.iter().map(|b| b.len()).sum();
                if remaining == 0 {
                    break;
                }
                let mut pick = rng.gen_range(0..remaining);
                for b in branches.iter_mut() {
                    if pick < b.len() {
                        out.extend(b.pop_front());
                        break;
                    }
                    pick -= b.len();
                }
            }
        }
        ProcessTree::Loop(c) => {
            playout(&c[0], loop_repeat, rng, out);
            let mut repeats = 0;
            while c.len() > 1 && repeats < MAX_LOOP_REPEATS && rng.gen_bool(loop_repeat.clamp(0.0, 1.0)) {
                let redo = rng.gen_range(1..c.len());
                playout(&c[redo], loop_repeat, rng, out);
                playout(&c[0], loop_repeat, rng, out);
                repeats += 1;
            }
        }
    }
}

fn hex(rng: &mut ChaCha8Rng, n: usize) -> String {
    (0..n)
        .map(|_| char::from_digit(rng.gen_range(0..16), 16).unwrap())
        .collect()
}

fn uuid_like(rng: &mut ChaCha8Rng) -> String {
    format!(
        "{}-{}-{}-{}-{}",
        hex(rng, 8),
        hex(rng, 4),
        hex(rng, 4),
        hex(rng, 4),
        hex(rng, 12)
    )
}

fn case_names(n: usize, format: CaseFormat, rng: &mut ChaCha8Rng) -> Vec<String> {
    match format {
        CaseFormat::Numeric => {
            let offset = rng.gen_range(1..90_000);
            (0..n).map(|i| (offset + i).to_string()).collect()
        }
        CaseFormat::Prefixed => {
            let prefix = words::CASE_PREFIXES.choose(rng).unwrap();
            let width = rng.gen_range(3..=6).max(n.to_string().len());
            (0..n).map(|i| format!("{prefix}{:0width$}", i + 1)).collect()
        }
        CaseFormat::UuidLike => (0..n).map(|_| uuid_like(rng)).collect(),
    }
}

/// One distractor column. Some kinds hold one value per case, the rest one per row.
fn distractor(case_of_row: &[usize], n_cases: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let rows = case_of_row.len();
    let per_case = |values: Vec<String>| -> Vec<String> { case_of_row.iter().map(|&c| values[c].clone()).collect() };
    match rng.gen_range(0..7) {
        0 => vec![words::CONSTANTS.choose(rng).unwrap().to_string(); rows],
        1 => {
            let hi = 10u64.pow(rng.gen_range(2..=6));
            (0..rows).map(|_| rng.gen_range(0..hi).to_string()).collect()
        }
        2 => (0..rows)
            .map(|_| {
                let n = rng.gen_range(1..=5);
                (0..n)
                    .map(|_| *words::LOREM.choose(rng).unwrap())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect(),
        3 => (0..rows).map(|_| uuid_like(rng)).collect(),
        4 => {
            let values = *words::CATEGORIES.choose(rng).unwrap();
            (0..rows).map(|_| values.choose(rng).unwrap().to_string()).collect()
        }
        5 => {
            let values = *words::CATEGORIES.choose(rng).unwrap();
            per_case((0..n_cases).map(|_| values.choose(rng).unwrap().to_string()).collect())
        }
        _ => {
            let start = NaiveDate::from_ymd_opt(1950, 1, 1).expect("valid date");
            per_case(
                (0..n_cases)
                    .map(|_| {
                        (start + chrono::Days::new(rng.gen_range(0..25_000)))
                            .format("%Y-%m-%d")
                            .to_string()
                    })
                    .collect(),
            )
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Labels { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Log(#[from] crate::ingest::LogError),
    #[error("{0}: no labeled logs found")]
    Empty(PathBuf),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Write `log_<i>.csv` and `log_<i>.labels.json` for every log.
pub fn write_corpus(dir: &Path, logs: &[LabeledLog]) -> Result<(), CorpusError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (i, item) in logs.iter().enumerate() {
        let csv_path = dir.join(format!("log_{i}.csv"));
        let file = fs::File::create(&csv_path).map_err(io_err(&csv_path))?;
        item.log.write_csv(io::BufWriter::new(file))?;
        let label_path = dir.join(format!("log_{i}.labels.json"));
        let json = serde_json::to_string_pretty(&item.labels).expect("labels serialize");
        fs::write(&label_path, json + "\n").map_err(io_err(&label_path))?;
    }
    Ok(())
}

/// CSV files in `dir` that have a `.labels.json` sidecar, ordered by file name
/// with numeric runs compared by value.
pub fn corpus_entries(dir: &Path) -> Result<Vec<(PathBuf, PathBuf)>, CorpusError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            let labels = path.with_extension("labels.json");
            if labels.exists() {
                out.push((path, labels));
            }
        }
    }
    out.sort_by_key(|(p, _)| natural_key(&p.file_name().unwrap_or_default().to_string_lossy()));
    Ok(out)
}

fn natural_key(name: &str) -> Vec<(String, u64)> {
    let mut out = Vec::new();
    let mut text = String::new();
    let mut num: Option<u64> = None;
    for ch in name.chars() {
        if let Some(d) = ch.to_digit(10) {
            num = Some(num.unwrap_or(0).saturating_mul(10).saturating_add(d as u64));
        } else {
            if let Some(n) = num.take() {
                out.push((std::mem::take(&mut text), n));
            }
            text.push(ch);
        }
    }
    out.push((text, num.unwrap_or(0)));
    out
}

pub fn read_labels(path: &Path) -> Result<Combo, CorpusError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| CorpusError::Labels {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::featurize_log;
    use crate::ingest::parse_timestamp_column;

    fn csv(l: &LabeledLog) -> String {
        let mut buf = Vec::new();
        l.log.write_csv(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn same_seed_same_bytes() {
        let c = SynthConfig {
            seed: 9,
            ..Default::default()
        };
        assert_eq!(csv(&generate_log(&c)), csv(&generate_log(&c)));
        let d = SynthConfig {
            seed: 10,
            ..Default::default()
        };
        assert_ne!(csv(&generate_log(&c)), csv(&generate_log(&d)));
    }

    #[test]
    fn column_count_and_labels() {
        let l = generate_log(&SynthConfig {
            seed: 1,
            n_distractors: 8,
            ..Default::default()
        });
        assert_eq!(l.log.n_columns(), 11);
        for role in crate::roles::Role::ALL {
            assert!(l.log.column(l.labels.get(role)).is_some());
        }
        assert!(l.labels.is_distinct());
    }

    #[test]
    fn case_column_repeats() {
        let l = generate_log(&SynthConfig {
            seed: 3,
            ..Default::default()
        });
        let fv = featurize_log(&l.log)
            .into_iter()
            .find(|(n, _)| *n == l.labels.case)
            .unwrap()
            .1;
        assert!(fv.f_r_unique < 1.0 && fv.f_m_unique > 1.0);
    }

    #[test]
    fn every_format_parses_fully() {
        for (i, &format) in TimestampFormat::ALL.iter().enumerate() {
            let l = generate_log(&SynthConfig {
                seed: i as u64,
                ts_format: format,
                ..Default::default()
            });
            let ts = parse_timestamp_column(&l.log.column(&l.labels.timestamp).unwrap().cells);
            assert_eq!(ts.parsed_fraction, 1.0, "{format:?}");
        }
    }

    #[test]
    fn trees_respect_bounds() {
        for seed in 0..50 {
            let l = generate_log(&SynthConfig {
                seed,
                n_cases: 5,
                ..Default::default()
            });
            let n = l.tree.activities().len();
            assert!((3..=10).contains(&n));
            assert!(l.tree.depth() <= 4, "{}", l.tree);
            assert!(l.tree.is_valid());
        }
    }

    #[test]
    fn corpus_seeds_and_formats_cycle() {
        let corpus = generate_corpus(
            100,
            4,
            &SynthConfig {
                n_cases: 5,
                ..Default::default()
            },
        );
        assert_eq!(corpus.len(), 4);
        let again = generate_corpus(
            100,
            4,
            &SynthConfig {
                n_cases: 5,
                ..Default::default()
            },
        );
        for (a, b) in corpus.iter().zip(&again) {
            assert_eq!(csv(a), csv(b));
        }
        assert_eq!(
            csv(&corpus[2]),
            csv(&generate_log(&SynthConfig {
                seed: 102,
                n_cases: 5,
                ts_format: TimestampFormat::ALL[2],
                case_format: CaseFormat::ALL[2],
                ..Default::default()
            }))
        );
    }

    #[test]
    fn corpus_round_trip_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = generate_corpus(
            7,
            12,
            &SynthConfig {
                n_cases: 4,
                ..Default::default()
            },
        );
        write_corpus(dir.path(), &corpus).unwrap();
        let entries = corpus_entries(dir.path()).unwrap();
        assert_eq!(entries.len(), 12);
        assert!(entries[2].0.ends_with("log_2.csv"));
        assert!(entries[11].0.ends_with("log_11.csv"));
        assert_eq!(read_labels(&entries[3].1).unwrap(), corpus[3].labels);
    }
}
