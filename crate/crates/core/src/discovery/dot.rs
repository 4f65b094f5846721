use std::fmt::Write;

use super::{Dfg, PetriNet};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering; places are circles, visible transitions boxes, silent transitions filled boxes.
pub fn net_to_dot(net: &PetriNet) -> String {
    let mut out = String::from("digraph petrinet {\n  rankdir=LR;\n");
    for (i, _) in net.places.iter().enumerate() {
        let style = if i == net.initial_place {
            "shape=circle, label=\"\", style=filled, fillcolor=lightgreen"
        } else if i == net.final_place {
            "shape=doublecircle, label=\"\""
        } else {
            "shape=circle, label=\"\""
        };
        let _ = writeln!(out, "  p{i} [{style}];");
    }
    for (i, t) in net.transitions.iter().enumerate() {
        match &t.label {
            Some(label) => {
                let _ = writeln!(out, "  t{i} [shape=box, label={}];", quote(label));
            }
            None => {
                let _ = writeln!(
                    out,
                    "  t{i} [shape=box, label=\"\", style=filled, fillcolor=black, width=0.2];"
                );
            }
        }
    }
    for (i, t) in net.transitions.iter().enumerate() {
        for p in &t.inputs {
            let _ = writeln!(out, "  p{p} -> t{i};");
        }
        for p in &t.outputs {
            let _ = writeln!(out, "  t{i} -> p{p};");
        }
    }
    out.push_str("}\n");
    out
}

pub fn dfg_to_dot(dfg: &Dfg) -> String {
    let mut out = String::from("digraph dfg {\n  rankdir=LR;\n");
    let index = |a: &str| dfg.activity_counts.keys().position(|k| k == a).unwrap_or(0);
    for (i, (a, c)) in dfg.activity_counts.iter().enumerate() {
        let _ = writeln!(out, "  a{i} [shape=box, label={}];", quote(&format!("{a} ({c})")));
    }
    for ((a, b), c) in &dfg.edge_counts {
        let _ = writeln!(out, "  a{} -> a{} [label=\"{c}\"];", index(a), index(b));
    }
    if !dfg.start_counts.is_empty() {
        out.push_str("  start [shape=circle, label=\"\", style=filled, fillcolor=lightgreen];\n");
        out.push_str("  end [shape=doublecircle, label=\"\"];\n");
    }
    for (a, c) in &dfg.start_counts {
        let _ = writeln!(out, "  start -> a{} [label=\"{c}\"];", index(a));
    }
    for (a, c) in &dfg.end_counts {
        let _ = writeln!(out, "  a{} -> end [label=\"{c}\"];", index(a));
    }
    out.push_str("}\n");
    out
}
