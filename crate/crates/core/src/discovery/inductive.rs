use std::collections::{BTreeMap, HashMap};

use super::{MinerParams, MiningError, ProcessTree, TraceLog};
use crate::cancel::{CancelToken, Cancelled};

/// Recursive cut detection on the directly-follows graph of each sublog.
pub fn mine_inductive(traces: &TraceLog, params: &MinerParams) -> Result<ProcessTree, MiningError> {
    mine_inductive_cancellable(traces, params, &CancelToken::never())
}

pub fn mine_inductive_cancellable(
    traces: &TraceLog,
    params: &MinerParams,
    cancel: &CancelToken,
) -> Result<ProcessTree, MiningError> {
    let mut names: Vec<&str> = traces.traces.iter().flatten().map(String::as_str).collect();
    names.sort_unstable();
    names.dedup();
    if names.is_empty() {
        return Err(MiningError::EmptyModel);
    }
    let ids: HashMap<&str, u32> = names.iter().enumerate().map(|(i, &n)| (n, i as u32)).collect();
    let log: Vec<Vec<u32>> = traces
        .traces
        .iter()
        .map(|t| t.iter().map(|a| ids[a.as_str()]).collect())
        .collect();
    let miner = Miner {
        names: &names,
        noise: params.im_noise_threshold,
        cancel,
    };
    Ok(miner.discover(log)?)
}

struct Miner<'a> {
    names: &'a [&'a str],
    noise: f64,
    cancel: &'a CancelToken,
}

/// Directly-follows graph over dense local indices.
struct LocalDfg {
    acts: Vec<u32>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    edge: HashMap<(usize, usize), usize>,
    start: Vec<bool>,
    end: Vec<bool>,
}

impl LocalDfg {
    fn new(log: &[Vec<u32>], noise: f64) -> (Self, HashMap<u32, usize>) {
        let mut acts: Vec<u32> = log.iter().flatten().copied().collect();
        acts.sort_unstable();
        acts.dedup();
        let local: HashMap<u32, usize> = acts.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let m = acts.len();
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut start = vec![false; m];
        let mut end = vec![false; m];
        for t in log {
            if let (Some(f), Some(l)) = (t.first(), t.last()) {
                start[local[f]] = true;
                end[local[l]] = true;
            }
            for w in t.windows(2) {
                *counts.entry((local[&w[0]], local[&w[1]])).or_default() += 1;
            }
        }
        let mut max_in = vec![0usize; m];
        for (&(_, b), &c) in &counts {
            max_in[b] = max_in[b].max(c);
        }
        let mut succ = vec![Vec::new(); m];
        let mut pred = vec![Vec::new(); m];
        let mut edge = HashMap::new();
        for (&(a, b), &c) in &counts {
            if (c as f64) < noise * max_in[b] as f64 {
                continue;
            }
            succ[a].push(b);
            pred[b].push(a);
            edge.insert((a, b), c);
        }
        (
            Self {
                acts,
                succ,
                pred,
                edge,
                start,
                end,
            },
            local,
        )
    }

    fn len(&self) -> usize {
        self.acts.len()
    }

    fn has(&self, a: usize, b: usize) -> bool {
        self.edge.contains_key(&(a, b))
    }

    fn reachability(&self, cancel: &CancelToken) -> Result<Vec<Bitset>, Cancelled> {
        let m = self.len();
        let mut out = Vec::with_capacity(m);
        for s in 0..m {
            cancel.check()?;
            let mut seen = Bitset::new(m);
            let mut stack: Vec<usize> = self.succ[s].clone();
            while let Some(x) = stack.pop() {
                if seen.insert(x) {
                    stack.extend(self.succ[x].iter().copied());
                }
            }
            out.push(seen);
        }
        Ok(out)
    }
}

#[derive(Clone)]
struct Bitset(Vec<u64>);

impl Bitset {
    fn new(n: usize) -> Self {
        Bitset(vec![0; n.div_ceil(64)])
    }

    fn insert(&mut self, i: usize) -> bool {
        let (w, b) = (i / 64, 1u64 << (i % 64));
        let fresh = self.0[w] & b == 0;
        self.0[w] |= b;
        fresh
    }

    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] & (1u64 << (i % 64)) != 0
    }

    fn union_with(&mut self, other: &Bitset) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    fn intersects(&self, other: &Bitset) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }

    /// Groups ordered by their smallest member.
    fn groups(&mut self) -> Vec<Vec<usize>> {
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..self.0.len() {
            let r = self.find(x);
            by_root.entry(r).or_default().push(x);
        }
        let mut out: Vec<Vec<usize>> = by_root.into_values().collect();
        out.sort_by_key(|g| g[0]);
        out
    }
}

enum Cut {
    Xor(Vec<Vec<usize>>),
    Sequence(Vec<Vec<usize>>),
    Parallel(Vec<Vec<usize>>),
    Loop(Vec<Vec<usize>>),
}

impl Miner<'_> {
    fn discover(&self, log: Vec<Vec<u32>>) -> Result<ProcessTree, Cancelled> {
        self.cancel.check()?;
        if log.is_empty() {
            return Ok(ProcessTree::Silent);
        }
        let total = log.len();
        let n_empty = log.iter().filter(|t| t.is_empty()).count();
        if n_empty == total {
            return Ok(ProcessTree::Silent);
        }
        if n_empty > 0 {
            let rest: Vec<Vec<u32>> = log.into_iter().filter(|t| !t.is_empty()).collect();
            let body = self.discover(rest)?;
            return Ok(if n_empty as f64 > self.noise * total as f64 {
                ProcessTree::Xor(vec![ProcessTree::Silent, body])
            } else {
                body
            });
        }

        let (dfg, local) = LocalDfg::new(&log, self.noise);
        if dfg.len() == 1 {
            let leaf = ProcessTree::activity(self.names[dfg.acts[0] as usize]);
            return Ok(if log.iter().all(|t| t.len() == 1) {
                leaf
            } else {
                ProcessTree::Loop(vec![leaf, ProcessTree::Silent])
            });
        }

        let cut = match xor_cut(&dfg) {
            Some(c) => Some(c),
            None => match sequence_cut(&dfg, self.cancel)? {
                Some(c) => Some(c),
                None => parallel_cut(&dfg).or_else(|| loop_cut(&dfg)),
            },
        };
        if let Some(cut) = cut {
            return self.apply(cut, &dfg, &local, log);
        }
        self.fall_through(&dfg, &local, log)
    }

    fn apply(
        &self,
        cut: Cut,
        dfg: &LocalDfg,
        local: &HashMap<u32, usize>,
        log: Vec<Vec<u32>>,
    ) -> Result<ProcessTree, Cancelled> {
        let m = dfg.len();
        let part_of = |parts: &[Vec<usize>]| {
            let mut v = vec![0usize; m];
            for (i, p) in parts.iter().enumerate() {
                for &x in p {
                    v[x] = i;
                }
            }
            v
        };
        match cut {
            Cut::Xor(parts) => {
                let owner = part_of(&parts);
                let mut subs = vec![Vec::new(); parts.len()];
                for t in log {
                    let mut votes = vec![0usize; parts.len()];
                    for a in &t {
                        votes[owner[local[a]]] += 1;
                    }
                    let best = (0..parts.len())
                        .max_by_key(|&i| (votes[i], std::cmp::Reverse(i)))
                        .unwrap_or(0);
                    subs[best].push(t.into_iter().filter(|a| owner[local[a]] == best).collect());
                }
                Ok(flatten(ProcessTree::Xor, self.recurse(subs)?, |t| {
                    matches!(t, ProcessTree::Xor(_))
                }))
            }
            Cut::Sequence(parts) => {
                let subs = project(&log, &part_of(&parts), parts.len(), local);
                Ok(flatten(ProcessTree::Sequence, self.recurse(subs)?, |t| {
                    matches!(t, ProcessTree::Sequence(_))
                }))
            }
            Cut::Parallel(parts) => {
                let subs = project(&log, &part_of(&parts), parts.len(), local);
                Ok(flatten(ProcessTree::Parallel, self.recurse(subs)?, |t| {
                    matches!(t, ProcessTree::Parallel(_))
                }))
            }
            Cut::Loop(parts) => {
                let owner = part_of(&parts);
                let mut subs: Vec<Vec<Vec<u32>>> = vec![Vec::new(); parts.len()];
                for t in log {
                    let mut segments: Vec<(usize, Vec<u32>)> = Vec::new();
                    for a in t {
                        let p = owner[local[&a]];
                        match segments.last_mut() {
                            Some((q, seg)) if *q == p => seg.push(a),
                            _ => {
                                let prev_is_redo = segments.last().is_none_or(|(q, _)| *q != 0);
                                if p != 0 && prev_is_redo {
                                    segments.push((0, Vec::new()));
                                }
                                segments.push((p, vec![a]));
                            }
                        }
                    }
                    if segments.last().is_some_and(|(q, _)| *q != 0) {
                        segments.push((0, Vec::new()));
                    }
                    for (p, seg) in segments {
                        subs[p].push(seg);
                    }
                }
                Ok(ProcessTree::Loop(self.recurse(subs)?))
            }
        }
    }

    fn recurse(&self, subs: Vec<Vec<Vec<u32>>>) -> Result<Vec<ProcessTree>, Cancelled> {
        subs.into_iter().map(|s| self.discover(s)).collect()
    }

    fn fall_through(
        &self,
        dfg: &LocalDfg,
        local: &HashMap<u32, usize>,
        log: Vec<Vec<u32>>,
    ) -> Result<ProcessTree, Cancelled> {
        let n_traces = log.len();
        let mut split: Vec<Vec<u32>> = Vec::new();
        for t in &log {
            let mut current = Vec::new();
            for (i, &a) in t.iter().enumerate() {
                current.push(a);
                if let Some(&next) = t.get(i + 1) {
                    if dfg.end[local[&a]] && dfg.start[local[&next]] {
                        split.push(std::mem::take(&mut current));
                    }
                }
            }
            split.push(current);
        }
        if split.len() > n_traces {
            let body = self.discover(split)?;
            return Ok(ProcessTree::Loop(vec![body, ProcessTree::Silent]));
        }
        let leaves: Vec<ProcessTree> = dfg
            .acts
            .iter()
            .map(|&a| ProcessTree::activity(self.names[a as usize]))
            .collect();
        Ok(ProcessTree::Loop(vec![ProcessTree::Xor(leaves), ProcessTree::Silent]))
    }
}

fn project(log: &[Vec<u32>], owner: &[usize], n_parts: usize, local: &HashMap<u32, usize>) -> Vec<Vec<Vec<u32>>> {
    let mut subs = vec![Vec::with_capacity(log.len()); n_parts];
    for t in log {
        let mut pieces = vec![Vec::new(); n_parts];
        for a in t {
            pieces[owner[local[a]]].push(*a);
        }
        for (sub, piece) in subs.iter_mut().zip(pieces) {
            sub.push(piece);
        }
    }
    subs
}

fn flatten(
    make: fn(Vec<ProcessTree>) -> ProcessTree,
    children: Vec<ProcessTree>,
    same: fn(&ProcessTree) -> bool,
) -> ProcessTree {
    let mut out = Vec::new();
    for c in children {
        if same(&c) {
            out.extend(c.children().iter().cloned());
        } else {
            out.push(c);
        }
    }
    make(out)
}

fn xor_cut(dfg: &LocalDfg) -> Option<Cut> {
    let mut uf = UnionFind::new(dfg.len());
    for &(a, b) in dfg.edge.keys() {
        uf.union(a, b);
    }
    let parts = uf.groups();
    (parts.len() >= 2).then_some(Cut::Xor(parts))
}

fn sequence_cut(dfg: &LocalDfg, cancel: &CancelToken) -> Result<Option<Cut>, Cancelled> {
    let m = dfg.len();
    let reach = dfg.reachability(cancel)?;
    let mut uf = UnionFind::new(m);
    for x in 0..m {
        cancel.check()?;
        for y in x + 1..m {
            let xy = reach[x].contains(y);
            let yx = reach[y].contains(x);
            if xy == yx {
                uf.union(x, y);
            }
        }
    }
    let mut groups = uf.groups();
    loop {
        cancel.check()?;
        let members: Vec<Bitset> = groups
            .iter()
            .map(|g| {
                let mut b = Bitset::new(m);
                g.iter().for_each(|&x| {
                    b.insert(x);
                });
                b
            })
            .collect();
        let reaches: Vec<Bitset> = groups
            .iter()
            .map(|g| {
                let mut b = Bitset::new(m);
                g.iter().for_each(|&x| b.union_with(&reach[x]));
                b
            })
            .collect();
        let mut merged = None;
        'outer: for i in 0..groups.len() {
            for j in i + 1..groups.len() {
                if reaches[i].intersects(&members[j]) && reaches[j].intersects(&members[i]) {
                    merged = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((i, j)) = merged else {
            if groups.len() < 2 {
                return Ok(None);
            }
            let mut order: Vec<usize> = (0..groups.len()).collect();
            let later = |i: usize| {
                (0..groups.len())
                    .filter(|&j| j != i && reaches[i].intersects(&members[j]))
                    .count()
            };
            order.sort_by_key(|&i| (std::cmp::Reverse(later(i)), groups[i][0]));
            return Ok(Some(Cut::Sequence(
                order.into_iter().map(|i| groups[i].clone()).collect(),
            )));
        };
        let moved = groups.remove(j);
        groups[i].extend(moved);
        groups[i].sort_unstable();
    }
}

fn parallel_cut(dfg: &LocalDfg) -> Option<Cut> {
    let m = dfg.len();
    let mut uf = UnionFind::new(m);
    for x in 0..m {
        for y in x + 1..m {
            if !(dfg.has(x, y) && dfg.has(y, x)) {
                uf.union(x, y);
            }
        }
    }
    let parts = uf.groups();
    let complete = |p: &Vec<usize>| p.iter().any(|&x| dfg.start[x]) && p.iter().any(|&x| dfg.end[x]);
    let (mut ok, deficient): (Vec<Vec<usize>>, Vec<Vec<usize>>) = parts.into_iter().partition(complete);
    if ok.len() < 2 {
        return None;
    }
    for p in deficient {
        ok[0].extend(p);
    }
    ok[0].sort_unstable();
    Some(Cut::Parallel(ok))
}

fn loop_cut(dfg: &LocalDfg) -> Option<Cut> {
    let m = dfg.len();
    let in_do: Vec<bool> = (0..m).map(|x| dfg.start[x] || dfg.end[x]).collect();
    let mut uf = UnionFind::new(m);
    for &(a, b) in dfg.edge.keys() {
        if !in_do[a] && !in_do[b] {
            uf.union(a, b);
        }
    }
    let starts: Vec<usize> = (0..m).filter(|&x| dfg.start[x]).collect();
    let ends: Vec<usize> = (0..m).filter(|&x| dfg.end[x]).collect();
    let mut body: Vec<usize> = (0..m).filter(|&x| in_do[x]).collect();
    let mut redo = Vec::new();
    for comp in uf.groups() {
        if in_do[comp[0]] {
            continue;
        }
        let inside = |x: usize| comp.binary_search(&x).is_ok();
        let valid = comp.iter().all(|&c| {
            let exits_ok = dfg.succ[c].iter().all(|&y| inside(y) || dfg.start[y]);
            let entries_ok = dfg.pred[c].iter().all(|&x| inside(x) || dfg.end[x]);
            let from_end = ends.iter().filter(|&&e| dfg.has(e, c)).count();
            let to_start = starts.iter().filter(|&&s| dfg.has(c, s)).count();
            exits_ok
                && entries_ok
                && (from_end == 0 || from_end == ends.len())
                && (to_start == 0 || to_start == starts.len())
        });
        if valid {
            redo.push(comp);
        } else {
            body.extend(comp);
        }
    }
    if redo.is_empty() {
        return None;
    }
    body.sort_unstable();
    let mut parts = vec![body];
    parts.extend(redo);
    Some(Cut::Loop(parts))
}
