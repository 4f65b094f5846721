use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::petri::{PetriNet, PlaceId};

/// Block-structured process model. Loop children are the do-part followed by redo parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "children")]
pub enum ProcessTree {
    Activity(String),
    Silent,
    Sequence(Vec<ProcessTree>),
    Xor(Vec<ProcessTree>),
    Parallel(Vec<ProcessTree>),
    Loop(Vec<ProcessTree>),
}

impl ProcessTree {
    pub fn activity(name: impl Into<String>) -> Self {
        ProcessTree::Activity(name.into())
    }

    pub fn children(&self) -> &[ProcessTree] {
        match self {
            ProcessTree::Activity(_) | ProcessTree::Silent => &[],
            ProcessTree::Sequence(c) | ProcessTree::Xor(c) | ProcessTree::Parallel(c) | ProcessTree::Loop(c) => c,
        }
    }

    /// Activity labels in left-to-right order.
    pub fn activities(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_activities(&mut out);
        out
    }

    fn collect_activities<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            ProcessTree::Activity(a) => out.push(a),
            _ => self.children().iter().for_each(|c| c.collect_activities(out)),
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(ProcessTree::depth).max().unwrap_or(0)
    }

    pub fn has_loop(&self) -> bool {
        matches!(self, ProcessTree::Loop(_)) || self.children().iter().any(ProcessTree::has_loop)
    }

    pub fn is_valid(&self) -> bool {
        match self {
            ProcessTree::Activity(_) | ProcessTree::Silent => true,
            _ => self.children().len() >= 2 && self.children().iter().all(ProcessTree::is_valid),
        }
    }

    /// All complete traces of a loop-free tree; `None` if the tree contains a loop.
    pub fn finite_language(&self) -> Option<BTreeSet<Vec<String>>> {
        Some(match self {
            ProcessTree::Activity(a) => BTreeSet::from([vec![a.clone()]]),
            ProcessTree::Silent => BTreeSet::from([Vec::new()]),
            ProcessTree::Xor(c) => {
                let mut out = BTreeSet::new();
                for child in c {
                    out.extend(child.finite_language()?);
                }
                out
            }
            ProcessTree::Sequence(c) => {
                let mut out = BTreeSet::from([Vec::new()]);
                for child in c {
                    let lang = child.finite_language()?;
                    out = out
                        .iter()
                        .flat_map(|p| lang.iter().map(move |s| [p.clone(), s.clone()].concat()))
                        .collect();
                }
                out
            }
            ProcessTree::Parallel(c) => {
                let mut out = BTreeSet::from([Vec::new()]);
                for child in c {
                    let lang = child.finite_language()?;
                    let mut next = BTreeSet::new();
                    for p in &out {
                        for s in &lang {
                            interleave(p, s, &mut Vec::new(), &mut next);
                        }
                    }
                    out = next;
                }
                out
            }
            ProcessTree::Loop(_) => return None,
        })
    }
}

fn interleave(a: &[String], b: &[String], prefix: &mut Vec<String>, out: &mut BTreeSet<Vec<String>>) {
    if a.is_empty() || b.is_empty() {
        let mut done = prefix.clone();
        done.extend_from_slice(a);
        done.extend_from_slice(b);
        out.insert(done);
        return;
    }
    prefix.push(a[0].clone());
    interleave(&a[1..], b, prefix, out);
    prefix.pop();
    prefix.push(b[0].clone());
    interleave(a, &b[1..], prefix, out);
    prefix.pop();
}

impl fmt::Display for ProcessTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self {
            ProcessTree::Activity(a) => return write!(f, "'{a}'"),
            ProcessTree::Silent => return f.write_str("tau"),
            ProcessTree::Sequence(_) => "->",
            ProcessTree::Xor(_) => "X",
            ProcessTree::Parallel(_) => "+",
            ProcessTree::Loop(_) => "*",
        };
        write!(f, "{op}(")?;
        for (i, c) in self.children().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// Compositional translation into a workflow net.
pub fn tree_to_net(tree: &ProcessTree) -> PetriNet {
    let mut net = PetriNet::new();
    let (source, sink) = (net.initial_place, net.final_place);
    translate(tree, source, sink, &mut net);
    net
}

fn translate(node: &ProcessTree, input: PlaceId, output: PlaceId, net: &mut PetriNet) {
    match node {
        ProcessTree::Activity(a) => {
            net.add_transition(Some(a.clone()), vec![input], vec![output]);
        }
        ProcessTree::Silent => {
            net.add_transition(None, vec![input], vec![output]);
        }
        ProcessTree::Sequence(children) => {
            let mut from = input;
            for (i, child) in children.iter().enumerate() {
                let to = if i + 1 == children.len() {
                    output
                } else {
                    net.add_place(format!("p{}", net.n_places()))
                };
                translate(child, from, to, net);
                from = to;
            }
        }
        ProcessTree::Xor(children) => {
            for child in children {
                translate(child, input, output, net);
            }
        }
        ProcessTree::Parallel(children) => {
            let mut starts = Vec::new();
            let mut ends = Vec::new();
            for child in children {
                let s = net.add_place(format!("p{}", net.n_places()));
                let e = net.add_place(format!("p{}", net.n_places()));
                translate(child, s, e, net);
                starts.push(s);
                ends.push(e);
            }
            net.add_transition(None, vec![input], starts);
            net.add_transition(None, ends, vec![output]);
        }
        ProcessTree::Loop(children) => {
            let s = net.add_place(format!("p{}", net.n_places()));
            let e = net.add_place(format!("p{}", net.n_places()));
            net.add_transition(None, vec![input], vec![s]);
            if let Some((body, redo)) = children.split_first() {
                translate(body, s, e, net);
                for child in redo {
                    translate(child, e, s, net);
                }
            }
            net.add_transition(None, vec![e], vec![output]);
        }
    }
}
