use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::cancel::{CancelToken, Cancelled};
use crate::discovery::{PetriNet, TraceLog, TransitionId};

/// Longest run of silent transitions fired to enable an event or reach the final place.
pub const SILENT_DEPTH: usize = 8;
const MAX_SEARCH_STATES: usize = 4096;

type Marking = Vec<u32>;

/// Token counts and per-state observations from replaying a log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplayStats {
    pub missing: u64,
    pub consumed: u64,
    pub produced: u64,
    pub remaining: u64,
    pub fitting_traces: usize,
    pub traces: usize,
    /// Non-forced firings per transition.
    pub executions: Vec<u64>,
    /// Sum over fitting states of visits x enabled labels, and of visits x escaping labels.
    pub enabled_weight: u64,
    pub escaping_weight: u64,
}

impl ReplayStats {
    pub fn fitness(&self) -> f64 {
        let ratio = |bad: u64, total: u64| {
            if total == 0 {
                1.0
            } else {
                1.0 - bad as f64 / total as f64
            }
        };
        (0.5 * ratio(self.missing, self.consumed) + 0.5 * ratio(self.remaining, self.produced)).clamp(0.0, 1.0)
    }

    /// Zero when no event could be replayed without forcing.
    pub fn precision(&self) -> f64 {
        if self.enabled_weight == 0 {
            return 0.0;
        }
        (1.0 - self.escaping_weight as f64 / self.enabled_weight as f64).clamp(0.0, 1.0)
    }

    pub fn generalization(&self, net: &PetriNet) -> f64 {
        let visible: Vec<u64> = net.visible().map(|(t, _)| self.executions[t]).collect();
        generalization_from_counts(&visible)
    }
}

/// Each transition adds 1/sqrt(executions), or 1 if never executed.
pub fn generalization_from_counts(executions: &[u64]) -> f64 {
    if executions.is_empty() {
        return 0.0;
    }
    let penalty: f64 = executions
        .iter()
        .map(|&e| if e == 0 { 1.0 } else { 1.0 / (e as f64).sqrt() })
        .sum();
    (1.0 - penalty / executions.len() as f64).clamp(0.0, 1.0)
}

struct State {
    visits: u64,
    enabled: usize,
    observed: BTreeSet<String>,
    closure: BTreeSet<String>,
}

pub struct Replayer<'a> {
    net: &'a PetriNet,
    by_label: HashMap<&'a str, Vec<TransitionId>>,
    silent: Vec<TransitionId>,
    track_precision: bool,
}

impl<'a> Replayer<'a> {
    pub fn new(net: &'a PetriNet, track_precision: bool) -> Self {
        let mut by_label: HashMap<&str, Vec<TransitionId>> = HashMap::new();
        let mut silent = Vec::new();
        for (t, tr) in net.transitions.iter().enumerate() {
            match &tr.label {
                Some(l) => by_label.entry(l.as_str()).or_default().push(t),
                None => silent.push(t),
            }
        }
        Self {
            net,
            by_label,
            silent,
            track_precision,
        }
    }

    fn enabled(&self, m: &Marking, t: TransitionId) -> bool {
        self.net.transitions[t].inputs.iter().all(|&p| m[p] > 0)
    }

    fn fire(&self, m: &mut Marking, t: TransitionId, stats: &mut ReplayStats) {
        let tr = &self.net.transitions[t];
        for &p in &tr.inputs {
            m[p] -= 1;
        }
        for &p in &tr.outputs {
            m[p] += 1;
        }
        stats.consumed += tr.inputs.len() as u64;
        stats.produced += tr.outputs.len() as u64;
    }

    fn fire_silently(&self, m: &mut Marking, t: TransitionId) {
        let tr = &self.net.transitions[t];
        for &p in &tr.inputs {
            m[p] -= 1;
        }
        for &p in &tr.outputs {
            m[p] += 1;
        }
    }

    /// Shortest run of silent transitions after which `goal` holds.
    fn silent_path(&self, start: &Marking, goal: impl Fn(&Marking) -> bool) -> Option<Vec<TransitionId>> {
        if goal(start) {
            return Some(Vec::new());
        }
        let mut nodes: Vec<(Marking, usize, TransitionId, usize)> = vec![(start.clone(), usize::MAX, usize::MAX, 0)];
        let mut seen: BTreeSet<Marking> = BTreeSet::from([start.clone()]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let depth = nodes[i].3;
            if depth >= SILENT_DEPTH {
                continue;
            }
            for &t in &self.silent {
                if !self.enabled(&nodes[i].0, t) {
                    continue;
                }
                let mut next = nodes[i].0.clone();
                self.fire_silently(&mut next, t);
                if !seen.insert(next.clone()) {
                    continue;
                }
                let reached = goal(&next);
                nodes.push((next, i, t, depth + 1));
                if reached {
                    let mut path = Vec::new();
                    let mut j = nodes.len() - 1;
                    while nodes[j].1 != usize::MAX {
                        path.push(nodes[j].2);
                        j = nodes[j].1;
                    }
                    path.reverse();
                    return Some(path);
                }
                if nodes.len() >= MAX_SEARCH_STATES {
                    return None;
                }
                queue.push_back(nodes.len() - 1);
            }
        }
        None
    }

    /// Visible labels enabled in any marking reachable through silent transitions.
    fn enabled_labels(&self, start: &Marking) -> BTreeSet<String> {
        let mut labels = BTreeSet::new();
        let mut seen: BTreeSet<Marking> = BTreeSet::from([start.clone()]);
        let mut frontier = vec![start.clone()];
        for depth in 0..=SILENT_DEPTH {
            let mut next_frontier = Vec::new();
            for m in &frontier {
                for (t, tr) in self.net.visible() {
                    if self.enabled(m, t) {
                        labels.insert(tr.label.clone().unwrap_or_default());
                    }
                }
                if depth == SILENT_DEPTH {
                    continue;
                }
                for &t in &self.silent {
                    if self.enabled(m, t) {
                        let mut next = m.clone();
                        self.fire_silently(&mut next, t);
                        if seen.len() < MAX_SEARCH_STATES && seen.insert(next.clone()) {
                            next_frontier.push(next);
                        }
                    }
                }
            }
            frontier = next_frontier;
        }
        labels
    }

    pub fn replay(&self, traces: &TraceLog, cancel: &CancelToken) -> Result<ReplayStats, Cancelled> {
        let places = self.net.n_places();
        let mut stats = ReplayStats {
            executions: vec![0; self.net.transitions.len()],
            traces: traces.len(),
            ..Default::default()
        };
        let mut states: HashMap<Marking, State> = HashMap::new();
        let mut closures: HashMap<Marking, BTreeSet<String>> = HashMap::new();

        for trace in &traces.traces {
            cancel.check()?;
            let mut m: Marking = vec![0; places];
            m[self.net.initial_place] = 1;
            stats.produced += 1;
            let mut fits = true;

            for label in trace {
                let Some(candidates) = self.by_label.get(label.as_str()) else {
                    stats.missing += 1;
                    stats.consumed += 1;
                    stats.produced += 1;
                    stats.remaining += 1;
                    fits = false;
                    continue;
                };
                let before = m.clone();
                let direct = candidates.iter().copied().find(|&t| self.enabled(&m, t));
                let chosen = match direct {
                    Some(t) => Some((Vec::new(), t)),
                    None => self
                        .silent_path(&m, |x| candidates.iter().any(|&t| self.enabled(x, t)))
                        .map(|path| {
                            let mut probe = m.clone();
                            path.iter().for_each(|&s| self.fire_silently(&mut probe, s));
                            let t = candidates
                                .iter()
                                .copied()
                                .find(|&t| self.enabled(&probe, t))
                                .unwrap_or(candidates[0]);
                            (path, t)
                        }),
                };
                match chosen {
                    Some((path, t)) => {
                        for s in path {
                            self.fire(&mut m, s, &mut stats);
                        }
                        self.fire(&mut m, t, &mut stats);
                        stats.executions[t] += 1;
                        if self.track_precision {
                            let closure = closures
                                .entry(before.clone())
                                .or_insert_with(|| self.enabled_labels(&before))
                                .clone();
                            let state = states.entry(before).or_insert_with(|| State {
                                visits: 0,
                                enabled: closure.len(),
                                observed: BTreeSet::new(),
                                closure,
                            });
                            state.visits += 1;
                            state.observed.insert(label.clone());
                        }
                    }
                    None => {
                        let t = candidates
                            .iter()
                            .copied()
                            .min_by_key(|&t| (self.net.transitions[t].inputs.iter().filter(|&&p| m[p] == 0).count(), t))
                            .expect("label has a transition");
                        for &p in &self.net.transitions[t].inputs {
                            if m[p] == 0 {
                                m[p] = 1;
                                stats.missing += 1;
                            }
                        }
                        self.fire(&mut m, t, &mut stats);
                        fits = false;
                    }
                }
            }

            let sink = self.net.final_place;
            if let Some(path) = self.silent_path(&m, |x| x[sink] > 0) {
                for s in path {
                    self.fire(&mut m, s, &mut stats);
                }
            }
            stats.consumed += 1;
            if m[sink] > 0 {
                m[sink] -= 1;
            } else {
                stats.missing += 1;
                fits = false;
            }
            let left: u64 = m.iter().map(|&c| c as u64).sum();
            stats.remaining += left;
            if fits && left == 0 {
                stats.fitting_traces += 1;
            }
        }

        for state in states.values() {
            let escaping = state.closure.difference(&state.observed).count();
            stats.enabled_weight += state.visits * state.enabled as u64;
            stats.escaping_weight += state.visits * escaping as u64;
        }
        Ok(stats)
    }
}
