use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::TraceLog;

/// Directly-follows graph with activity, edge, start and end frequencies.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dfg {
    pub activity_counts: BTreeMap<String, usize>,
    pub edge_counts: BTreeMap<(String, String), usize>,
    pub start_counts: BTreeMap<String, usize>,
    pub end_counts: BTreeMap<String, usize>,
}

impl Dfg {
    pub fn edge(&self, from: &str, to: &str) -> usize {
        self.edge_counts
            .get(&(from.to_string(), to.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn n_activities(&self) -> usize {
        self.activity_counts.len()
    }
}

pub fn build_dfg(traces: &TraceLog) -> Dfg {
    let mut dfg = Dfg::default();
    for trace in &traces.traces {
        let (Some(first), Some(last)) = (trace.first(), trace.last()) else {
            continue;
        };
        *dfg.start_counts.entry(first.clone()).or_default() += 1;
        *dfg.end_counts.entry(last.clone()).or_default() += 1;
        for a in trace {
            *dfg.activity_counts.entry(a.clone()).or_default() += 1;
        }
        for pair in trace.windows(2) {
            *dfg.edge_counts.entry((pair[0].clone(), pair[1].clone())).or_default() += 1;
        }
    }
    dfg
}
