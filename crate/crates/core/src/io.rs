//! JSON graph files, JSON exports of traces and loci, and TSV plot data.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::rational::{format_rational, parse_rational, to_decimal, Rational};
use crate::redmap::{RedTrace, TraceSegment};
use crate::reduction::Cut;
use crate::special::Locus;

const DIGITS: usize = 12;

fn parse_length(id: &str, v: &Value) -> Result<Rational> {
    let bad = |reason: String| Error::InvalidLength {
        edge: id.to_string(),
        reason,
    };
    match v {
        Value::String(s) => parse_rational(s).map_err(|_| bad(format!("{s:?} is not a rational"))),
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(Rational::from_integer(i.into())),
            None => Err(bad(format!("{n} is not an integer or a \"p/q\" string"))),
        },
        other => Err(bad(format!("{other} is not a length"))),
    }
}

/// Reads `{"vertices": [...], "edges": [{"id", "ends": [a, b], "length"}]}`.
pub fn parse_graph(text: &str) -> Result<MetricGraph> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("graph file: {e}")))?;
    let vertices = root
        .get("vertices")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("graph file needs a \"vertices\" array".into()))?
        .iter()
        .map(|v| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| Error::Parse(format!("vertex {v} is not a string")))
        })
        .collect::<Result<Vec<_>>>()?;
    let edges = root
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("graph file needs an \"edges\" array".into()))?
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let id = e
                .get("id")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Parse(format!("edge #{i} has no string \"id\"")))?
                .to_string();
            let ends = e
                .get("ends")
                .and_then(Value::as_array)
                .filter(|a| a.len() == 2 && a.iter().all(Value::is_string))
                .ok_or_else(|| Error::Parse(format!("edge {id} needs \"ends\": [a, b]")))?;
            let length = parse_length(&id, e.get("length").unwrap_or(&Value::Null))?;
            let a = ends[0].as_str().unwrap_or_default().to_string();
            let b = ends[1].as_str().unwrap_or_default().to_string();
            Ok((id, a, b, length))
        })
        .collect::<Result<Vec<_>>>()?;
    MetricGraph::new(vertices, edges)
}

pub fn graph_to_json(graph: &MetricGraph) -> Value {
    let edges: Vec<Value> = graph
        .edges()
        .iter()
        .map(|e| {
            json!({
                "id": e.id,
                "ends": [graph.vertex_name(e.ends[0]), graph.vertex_name(e.ends[1])],
                "length": format_rational(&e.length),
            })
        })
        .collect();
    json!({ "vertices": graph.vertex_names(), "edges": edges })
}

pub fn divisor_to_json(graph: &MetricGraph, d: &Divisor) -> Value {
    json!(d.display(graph).to_string())
}

fn cut_to_json(graph: &MetricGraph, cut: &Cut) -> Value {
    let vertices: Vec<&str> = cut.vertices.iter().map(|&v| graph.vertex_name(v)).collect();
    let mut intervals = serde_json::Map::new();
    for (e, list) in cut.intervals.iter().enumerate() {
        if !list.is_empty() {
            let pairs: Vec<Value> = list
                .iter()
                .map(|(a, b)| json!([format_rational(a), format_rational(b)]))
                .collect();
            intervals.insert(graph.edge(e).id.clone(), Value::Array(pairs));
        }
    }
    json!({ "vertices": vertices, "intervals": intervals })
}

fn segment_to_json(graph: &MetricGraph, s: &TraceSegment) -> Value {
    let moving: Vec<Value> = s
        .moving_chips
        .iter()
        .map(|c| {
            json!({
                "anchor": graph.point_name(&c.anchor),
                "edge": graph.edge(c.germ.edge).id,
                "forward": c.germ.forward,
                "start_offset": format_rational(&c.start_offset),
                "speed": c.speed,
            })
        })
        .collect();
    json!({
        "t0": format_rational(&s.t0),
        "t1": format_rational(&s.t1),
        "cut": s.cut.as_ref().map(|c| cut_to_json(graph, c)),
        "excess": s.excess,
        "moving_chips": moving,
        "base_chip_count": s.base_chip_count,
        "static_part": divisor_to_json(graph, &s.static_part),
        "start": divisor_to_json(graph, &s.assemble(graph, &s.t0)),
        "end": divisor_to_json(graph, &s.assemble(graph, &s.t1)),
    })
}

pub fn trace_to_json(graph: &MetricGraph, trace: &RedTrace) -> Value {
    let segments: Vec<Value> = trace.segments.iter().map(|s| segment_to_json(graph, s)).collect();
    json!({ "edge": graph.edge(trace.edge).id, "segments": segments })
}

pub fn locus_to_json(graph: &MetricGraph, locus: &Locus) -> Value {
    let per_edge = |lists: Vec<(String, Value)>| -> Value {
        Value::Object(lists.into_iter().collect())
    };
    let intervals = per_edge(
        locus
            .intervals
            .iter()
            .enumerate()
            .filter(|(_, l)| !l.is_empty())
            .map(|(e, l)| {
                let pairs: Vec<Value> = l
                    .iter()
                    .map(|(a, b)| json!([format_rational(a), format_rational(b)]))
                    .collect();
                (graph.edge(e).id.clone(), Value::Array(pairs))
            })
            .collect(),
    );
    let points = per_edge(
        locus
            .points
            .iter()
            .enumerate()
            .filter(|(_, l)| !l.is_empty())
            .map(|(e, l)| {
                let list: Vec<Value> = l.iter().map(|o| json!(format_rational(o))).collect();
                (graph.edge(e).id.clone(), Value::Array(list))
            })
            .collect(),
    );
    let vertices: Vec<&str> = locus.vertices.iter().map(|&v| graph.vertex_name(v)).collect();
    json!({ "vertices": vertices, "intervals": intervals, "points": points })
}

/// One row per segment end: `t`, its decimal value, then the chips of the
/// reduced divisor in sorted order, one column per chip.
pub fn trace_tsv(graph: &MetricGraph, trace: &RedTrace) -> String {
    let mut rows: Vec<(Rational, Vec<String>)> = Vec::new();
    for s in &trace.segments {
        for t in [&s.t0, &s.t1] {
            let chips: Vec<String> = s
                .assemble(graph, t)
                .terms()
                .flat_map(|(p, c)| {
                    let name = graph.point_name(p);
                    let name = if c < 0 { format!("-{name}") } else { name };
                    std::iter::repeat_n(name, c.unsigned_abs() as usize)
                })
                .collect();
            if rows.last().is_some_and(|(lt, lc)| lt == t && *lc == chips) {
                continue;
            }
            rows.push((t.clone(), chips));
        }
    }
    let width = rows.iter().map(|r| r.1.len()).max().unwrap_or(0);
    let mut out = String::from("t\tt_decimal");
    for i in 1..=width {
        let _ = write!(out, "\tchip{i}");
    }
    out.push('\n');
    for (t, chips) in rows {
        let _ = write!(out, "{}\t{}", format_rational(&t), to_decimal(&t, DIGITS));
        for i in 0..width {
            let _ = write!(out, "\t{}", chips.get(i).map(String::as_str).unwrap_or(""));
        }
        out.push('\n');
    }
    out
}

/// One row per interval, isolated point and vertex of the locus.
pub fn locus_tsv(graph: &MetricGraph, locus: &Locus) -> String {
    let mut out = String::from("kind\tsite\tstart\tend\tstart_decimal\tend_decimal\n");
    let mut row = |kind: &str, site: &str, a: &Rational, b: &Rational| {
        let _ = writeln!(
            out,
            "{kind}\t{site}\t{}\t{}\t{}\t{}",
            format_rational(a),
            format_rational(b),
            to_decimal(a, DIGITS),
            to_decimal(b, DIGITS)
        );
    };
    for (e, list) in locus.intervals.iter().enumerate() {
        for (a, b) in list {
            row("interval", &graph.edge(e).id, a, b);
        }
    }
    for (e, list) in locus.points.iter().enumerate() {
        for o in list {
            row("point", &graph.edge(e).id, o, o);
        }
    }
    let zero = Rational::from_integer(0.into());
    for &v in &locus.vertices {
        row("vertex", graph.vertex_name(v), &zero, &zero);
    }
    out
}
