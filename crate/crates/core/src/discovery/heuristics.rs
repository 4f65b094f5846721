use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{MinerParams, MiningError, PetriNet, TraceLog};
use crate::cancel::CancelToken;

/// Dependency-graph mining followed by a causal-net to Petri-net conversion.
pub fn mine_heuristics(traces: &TraceLog, params: &MinerParams) -> Result<PetriNet, MiningError> {
    mine_heuristics_cancellable(traces, params, &CancelToken::never())
}

pub fn mine_heuristics_cancellable(
    traces: &TraceLog,
    params: &MinerParams,
    cancel: &CancelToken,
) -> Result<PetriNet, MiningError> {
    let mut act_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for a in traces.traces.iter().flatten() {
        *act_counts.entry(a.as_str()).or_default() += 1;
    }
    let names: Vec<&str> = act_counts
        .iter()
        .filter(|(_, &c)| c >= params.hm_min_act_count.max(1))
        .map(|(&a, _)| a)
        .collect();
    if names.is_empty() {
        return Err(MiningError::EmptyModel);
    }
    let n = names.len();
    let (start, end) = (n, n + 1);
    let ids: HashMap<&str, usize> = names.iter().enumerate().map(|(i, &a)| (a, i)).collect();

    let mut counts = Counts::default();
    for t in &traces.traces {
        cancel.check()?;
        let mut seq = vec![start];
        seq.extend(t.iter().filter_map(|a| ids.get(a.as_str()).copied()));
        if seq.len() == 1 {
            continue;
        }
        seq.push(end);
        counts.add(&seq);
    }

    let mut max_out = vec![0usize; n + 2];
    for (&(a, _), &c) in &counts.df {
        if c >= params.hm_min_dfg_count {
            max_out[a] = max_out[a].max(c);
        }
    }
    let kept: BTreeMap<(usize, usize), usize> = counts
        .df
        .iter()
        .filter(|(&(a, _), &c)| {
            c >= params.hm_min_dfg_count && c as f64 >= params.hm_preclean_noise * max_out[a] as f64
        })
        .map(|(&k, &c)| (k, c))
        .collect();
    let kept_count = |a: usize, b: usize| kept.get(&(a, b)).copied().unwrap_or(0);

    let threshold = params.hm_dependency_threshold;
    let mut causal: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &(a, b) in kept.keys() {
        if dependency(kept_count(a, b), kept_count(b, a), a == b) >= threshold {
            causal.insert((a, b));
        }
    }
    for (&(a, b), &c_ab) in &counts.l2 {
        if a > b || causal.contains(&(a, a)) || causal.contains(&(b, b)) {
            continue;
        }
        let total = c_ab + counts.l2.get(&(b, a)).copied().unwrap_or(0);
        let measure = total as f64 / (total as f64 + 1.0);
        if total >= params.hm_loop_two_threshold && measure >= threshold {
            causal.insert((a, b));
            causal.insert((b, a));
        }
    }
    connect_all(&mut causal, &counts, n, cancel)?;

    cancel.check()?;
    Ok(to_petri_net(&names, &causal, &counts, params.hm_and_threshold))
}

#[derive(Default)]
struct Counts {
    df: BTreeMap<(usize, usize), usize>,
    l2: BTreeMap<(usize, usize), usize>,
}

impl Counts {
    fn add(&mut self, seq: &[usize]) {
        for w in seq.windows(2) {
            *self.df.entry((w[0], w[1])).or_default() += 1;
        }
        for w in seq.windows(3) {
            if w[0] == w[2] && w[0] != w[1] {
                *self.l2.entry((w[0], w[1])).or_default() += 1;
            }
        }
    }

    fn df(&self, a: usize, b: usize) -> usize {
        self.df.get(&(a, b)).copied().unwrap_or(0)
    }
}

fn dependency(ab: usize, ba: usize, self_loop: bool) -> f64 {
    if self_loop {
        ab as f64 / (ab as f64 + 1.0)
    } else {
        (ab as f64 - ba as f64) / (ab as f64 + ba as f64 + 1.0)
    }
}

/// Give every activity a non-self predecessor and successor, and the artificial
/// start and end at least one arc, using the strongest unfiltered relation.
fn connect_all(
    causal: &mut BTreeSet<(usize, usize)>,
    counts: &Counts,
    n: usize,
    cancel: &CancelToken,
) -> Result<(), MiningError> {
    let (start, end) = (n, n + 1);
    let mut has_in = vec![false; n + 2];
    let mut has_out = vec![false; n + 2];
    for &(a, b) in causal.iter() {
        if a != b {
            has_out[a] = true;
            has_in[b] = true;
        }
    }
    let score = |a: usize, b: usize| (dependency(counts.df(a, b), counts.df(b, a), false), counts.df(a, b));
    for x in 0..n + 2 {
        cancel.check()?;
        if x != start && !has_in[x] {
            let best = (0..n + 2)
                .filter(|&y| y != x && counts.df(y, x) > 0)
                .max_by(|&p, &q| score(p, x).partial_cmp(&score(q, x)).unwrap().then(q.cmp(&p)));
            if let Some(y) = best {
                causal.insert((y, x));
                has_out[y] = true;
            }
        }
        if x != end && !has_out[x] {
            let best = (0..n + 2)
                .filter(|&y| y != x && counts.df(x, y) > 0)
                .max_by(|&p, &q| score(x, p).partial_cmp(&score(x, q)).unwrap().then(q.cmp(&p)));
            if let Some(y) = best {
                causal.insert((x, y));
                has_in[y] = true;
            }
        }
    }
    Ok(())
}

/// Complete-link greedy clustering: the strongest pair above threshold merges first,
/// and a merge happens only if every cross pair clears the threshold.
fn and_clusters(members: &[usize], measure: impl Fn(usize, usize) -> f64, threshold: f64) -> Vec<Vec<usize>> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &x) in members.iter().enumerate() {
        for &y in &members[i + 1..] {
            let m = measure(x, y);
            if m >= threshold {
                pairs.push((m, x, y));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut cluster_of: HashMap<usize, usize> = members.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let mut clusters: Vec<Vec<usize>> = members.iter().map(|&x| vec![x]).collect();
    for (_, x, y) in pairs {
        let (cx, cy) = (cluster_of[&x], cluster_of[&y]);
        if cx == cy {
            continue;
        }
        let joinable = clusters[cx]
            .iter()
            .all(|&p| clusters[cy].iter().all(|&q| measure(p, q) >= threshold));
        if joinable {
            let moved = std::mem::take(&mut clusters[cy]);
            for &m in &moved {
                cluster_of.insert(m, cx);
            }
            clusters[cx].extend(moved);
        }
    }
    clusters.retain(|c| !c.is_empty());
    clusters
}

/// Each activity gets one shared place for its XOR successors and one for its XOR
/// predecessors; AND members get a place per edge. An edge whose ends are both
/// shared places is bridged by a silent transition so choices stay local.
fn to_petri_net(names: &[&str], causal: &BTreeSet<(usize, usize)>, counts: &Counts, and_threshold: f64) -> PetriNet {
    let n = names.len();
    let (start, end) = (n, n + 1);
    let mut outs = vec![Vec::new(); n + 2];
    let mut ins = vec![Vec::new(); n + 2];
    for &(a, b) in causal.iter().filter(|(a, b)| a != b) {
        outs[a].push(b);
        ins[b].push(a);
    }

    // For each node: the XOR members of its split and of its join (groups of two or more).
    let mut xor_out: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n + 2];
    let mut xor_in: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n + 2];
    let singles = |clusters: Vec<Vec<usize>>| -> BTreeSet<usize> {
        clusters.into_iter().filter(|c| c.len() == 1).map(|c| c[0]).collect()
    };
    for a in 0..n + 2 {
        let split = and_clusters(
            &outs[a],
            |b, c| (counts.df(b, c) + counts.df(c, b)) as f64 / (counts.df(a, b) + counts.df(a, c) + 1) as f64,
            and_threshold,
        );
        let xor = singles(split);
        if xor.len() >= 2 {
            xor_out[a] = xor;
        }
        let join = and_clusters(
            &ins[a],
            |b, c| (counts.df(b, c) + counts.df(c, b)) as f64 / (counts.df(b, a) + counts.df(c, a) + 1) as f64,
            and_threshold,
        );
        let xor = singles(join);
        if xor.len() >= 2 {
            xor_in[a] = xor;
        }
    }

    let mut net = PetriNet::new();
    let mut out_shared: BTreeMap<usize, usize> = BTreeMap::new();
    let mut in_shared: BTreeMap<usize, usize> = BTreeMap::new();
    for a in 0..n + 2 {
        if !xor_out[a].is_empty() {
            out_shared.insert(a, net.add_place(format!("out({})", node_name(names, a))));
        }
        if !xor_in[a].is_empty() {
            in_shared.insert(a, net.add_place(format!("in({})", node_name(names, a))));
        }
    }
    let mut producer_side: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut consumer_side: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut bridges: Vec<(usize, usize)> = Vec::new();
    for a in 0..n + 2 {
        for &b in &outs[a] {
            let shared_out = xor_out[a].contains(&b);
            let shared_in = xor_in[b].contains(&a);
            let (p, q) = match (shared_out, shared_in) {
                (false, false) => {
                    let p = net.add_place(format!("p({},{})", node_name(names, a), node_name(names, b)));
                    (p, p)
                }
                (false, true) => (in_shared[&b], in_shared[&b]),
                (true, false) => (out_shared[&a], out_shared[&a]),
                (true, true) => {
                    bridges.push((out_shared[&a], in_shared[&b]));
                    (out_shared[&a], in_shared[&b])
                }
            };
            producer_side.insert((a, b), p);
            consumer_side.insert((a, b), q);
        }
    }
    let inputs = |x: usize| -> Vec<usize> { ins[x].iter().map(|&a| consumer_side[&(a, x)]).collect() };
    let outputs = |x: usize| -> Vec<usize> { outs[x].iter().map(|&b| producer_side[&(x, b)]).collect() };

    let (source, sink) = (net.initial_place, net.final_place);
    net.add_transition(None, vec![source], outputs(start));
    for (a, name) in names.iter().enumerate() {
        net.add_transition(Some(name.to_string()), inputs(a), outputs(a));
    }
    for (a, name) in names.iter().enumerate() {
        if causal.contains(&(a, a)) {
            net.add_transition(Some(name.to_string()), outputs(a), outputs(a));
        }
    }
    for (p, q) in bridges {
        net.add_transition(None, vec![p], vec![q]);
    }
    net.add_transition(None, inputs(end), vec![sink]);
    net
}

fn node_name<'a>(names: &[&'a str], x: usize) -> &'a str {
    match x.checked_sub(names.len()) {
        None => names[x],
        Some(0) => "start",
        Some(_) => "end",
    }
}
