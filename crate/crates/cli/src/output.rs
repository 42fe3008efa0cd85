use std::fmt::Write;

use dichromat::dp::{DpProfile, ProfileKind};
use dichromat::sweepout::SweepoutTrace;
use dichromat::tree::{count_dichromatic, Coloring};
use serde::Serialize;
use serde_json::{json, Value};

/// Rounds to 12 significant digits and prints the shortest form of the result.
pub fn fmt_float(x: f64) -> String {
    round12(x).to_string()
}

fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round12(x))) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Pretty JSON with a trailing newline and floats rounded to 12 digits.
pub fn json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("report types serialize");
    round_floats(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

fn kind_name(kind: ProfileKind) -> &'static str {
    match kind {
        ProfileKind::Node => "node",
        ProfileKind::Leaf => "leaf",
    }
}

pub fn profile_csv(p: &DpProfile) -> String {
    let mut out = String::from("index,min_d\n");
    for (i, d) in p.iter() {
        let _ = writeln!(out, "{i},{d}");
    }
    out
}

pub fn profile_json(p: &DpProfile) -> String {
    let rows: Vec<Value> = p.iter().map(|(i, d)| json!({"index": i, "min_d": d})).collect();
    json(&json!({
        "m": p.m(),
        "kind": kind_name(p.kind()),
        "rows": rows,
    }))
}

/// The library's trace CSV with volumes rounded to 12 digits.
pub fn trace_csv(trace: &SweepoutTrace) -> String {
    let raw = trace.to_csv();
    let mut lines = raw.lines();
    let mut out = String::with_capacity(raw.len());
    if let Some(header) = lines.next() {
        out.push_str(header);
        out.push('\n');
    }
    for line in lines {
        match line.rsplit_once(',') {
            Some((head, v)) => match v.parse::<f64>() {
                Ok(x) => {
                    let _ = writeln!(out, "{head},{}", fmt_float(x));
                }
                Err(_) => {
                    let _ = writeln!(out, "{line}");
                }
            },
            None => {
                let _ = writeln!(out, "{line}");
            }
        }
    }
    out
}

/// Undirected Graphviz graph: black nodes filled, dichromatic edges bold.
pub fn dot_graph(c: &Coloring) -> String {
    let tree = c.tree();
    let (d, dichromatic) = count_dichromatic(c);
    let bold: std::collections::BTreeSet<(usize, usize)> = dichromatic.edges.iter().copied().collect();
    let blacks = c.black_nodes().count();
    let leaves = c.black_nodes().filter(|&v| tree.is_leaf(v)).count();
    let mut out = String::new();
    let _ = writeln!(out, "graph T{} {{", tree.depth());
    let _ = writeln!(out, "  // black nodes {blacks}, black leaves {leaves}, dichromatic edges {d}");
    let _ = writeln!(out, "  node [shape=circle];");
    for v in 1..=tree.node_count() {
        if c.is_black(v) {
            let _ = writeln!(out, "  {v} [style=filled, fillcolor=black, fontcolor=white];");
        } else {
            let _ = writeln!(out, "  {v};");
        }
    }
    for (p, ch) in tree.edges() {
        if bold.contains(&(p, ch)) {
            let _ = writeln!(out, "  {p} -- {ch} [style=bold, penwidth=3];");
        } else {
            let _ = writeln!(out, "  {p} -- {ch};");
        }
    }
    out.push_str("}\n");
    out
}
