use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{EventLog, TimestampParse};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("column {0:?} is entirely empty")]
    EmptyColumn(String),
    #[error("timestamp keys cover {keys} rows but the log has {rows}")]
    Misaligned { keys: usize, rows: usize },
}

/// Activity sequences, one per case, in first-appearance order of the case.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceLog {
    pub traces: Vec<Vec<String>>,
    pub case_ids: Vec<String>,
}

impl TraceLog {
    /// Build from literal traces; case ids are the trace positions.
    pub fn from_traces<S: AsRef<str>>(traces: &[Vec<S>]) -> Self {
        let traces: Vec<Vec<String>> = traces
            .iter()
            .filter(|t| !t.is_empty())
            .map(|t| t.iter().map(|a| a.as_ref().to_string()).collect())
            .collect();
        let case_ids = (1..=traces.len()).map(|i| i.to_string()).collect();
        Self { traces, case_ids }
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn n_events(&self) -> usize {
        self.traces.iter().map(Vec::len).sum()
    }

    /// Cases at the given positions, in the given order.
    pub fn subset(&self, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut out = Self::default();
        for i in indices {
            out.traces.push(self.traces[i].clone());
            out.case_ids.push(self.case_ids[i].clone());
        }
        out
    }

    /// First `n` cases and the rest.
    pub fn split_at(&self, n: usize) -> (Self, Self) {
        let n = n.min(self.len());
        (self.subset(0..n), self.subset(n..self.len()))
    }
}

/// Group rows by case value and order each group by timestamp key, then row index.
/// Rows with an empty activity cell are skipped; rows with a missing key sort last.
pub fn build_traces(
    log: &EventLog,
    case_col: &str,
    act_col: &str,
    ts: &TimestampParse,
) -> Result<TraceLog, TraceError> {
    let column = |name: &str| {
        log.column(name)
            .map(|c| &c.cells)
            .ok_or_else(|| TraceError::UnknownColumn(name.to_string()))
    };
    let cases = column(case_col)?;
    let acts = column(act_col)?;
    if ts.keys.len() != log.n_rows() {
        return Err(TraceError::Misaligned {
            keys: ts.keys.len(),
            rows: log.n_rows(),
        });
    }
    for (name, cells) in [(case_col, cases), (act_col, acts)] {
        if cells.iter().all(String::is_empty) {
            return Err(TraceError::EmptyColumn(name.to_string()));
        }
    }

    let mut slot: HashMap<&str, usize> = HashMap::new();
    let mut groups: Vec<(&str, Vec<usize>)> = Vec::new();
    for (row, case) in cases.iter().enumerate() {
        let i = *slot.entry(case.as_str()).or_insert_with(|| {
            groups.push((case.as_str(), Vec::new()));
            groups.len() - 1
        });
        groups[i].1.push(row);
    }

    let mut out = TraceLog::default();
    for (case, mut rows) in groups {
        rows.retain(|&r| !acts[r].is_empty());
        if rows.is_empty() {
            continue;
        }
        rows.sort_by_key(|&r| (ts.keys[r].is_none(), ts.keys[r], r));
        out.traces.push(rows.iter().map(|&r| acts[r].clone()).collect());
        out.case_ids.push(case.to_string());
    }
    Ok(out)
}
