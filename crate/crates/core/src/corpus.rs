//! Named curves: small fixtures and the families whose canonical divisor is
//! not very ample.

use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::rational::{rat, Rational};

type EdgeSpec = (String, String, String, Rational);

fn build(vertices: &[&str], edges: Vec<EdgeSpec>) -> Result<MetricGraph> {
    let refs: Vec<(&str, &str, &str, Rational)> = edges
        .iter()
        .map(|(id, a, b, l)| (id.as_str(), a.as_str(), b.as_str(), l.clone()))
        .collect();
    MetricGraph::from_spec(vertices, &refs)
}

fn edge(id: &str, a: &str, b: &str, len: &Rational) -> EdgeSpec {
    (id.into(), a.into(), b.into(), len.clone())
}

/// Takes the `i`-th length, cycling through the list.
fn pick(lengths: &[Rational], i: usize) -> Rational {
    if lengths.is_empty() {
        rat(1)
    } else {
        lengths[i % lengths.len()].clone()
    }
}

fn check_genus(g: usize, least: usize) -> Result<()> {
    if g < least {
        return Err(Error::GenusTooSmall(g));
    }
    Ok(())
}

pub fn segment(length: Rational) -> Result<MetricGraph> {
    build(&["A", "B"], vec![edge("s", "A", "B", &length)])
}

pub fn circle(length: Rational) -> Result<MetricGraph> {
    build(&["O"], vec![edge("c", "O", "O", &length)])
}

/// Two vertices joined by `g + 1` edges.
pub fn banana(g: usize, lengths: &[Rational]) -> Result<MetricGraph> {
    check_genus(g, 1)?;
    let edges = (0..=g)
        .map(|i| edge(&format!("e{}", i + 1), "P", "Q", &pick(lengths, i)))
        .collect();
    build(&["P", "Q"], edges)
}

pub fn theta(lengths: [Rational; 3]) -> Result<MetricGraph> {
    banana(2, &lengths)
}

fn bundle(g: usize, lengths: &[Rational]) -> Vec<EdgeSpec> {
    (0..g - 1)
        .map(|i| edge(&format!("e{}", i + 1), "P", "Q", &pick(lengths, i)))
        .collect()
}

/// `g - 1` edges from `P` to `Q`, a path `P - R - Q` with both halves of
/// length `half`, and a loop at `R`.
pub fn c2(g: usize, bundle_lengths: &[Rational], half: Rational, loop_length: Rational) -> Result<MetricGraph> {
    check_genus(g, 2)?;
    let mut edges = bundle(g, bundle_lengths);
    edges.push(edge("pr", "P", "R", &half));
    edges.push(edge("rq", "R", "Q", &half));
    edges.push(edge("loop", "R", "R", &loop_length));
    build(&["P", "Q", "R"], edges)
}

/// `g - 1` edges from `P` to `Q`, edges `P - R` and `Q - S` of length
/// `arm`, and two edges between `R` and `S`.
pub fn c2_prime(g: usize, bundle_lengths: &[Rational], arm: Rational, rs: [Rational; 2]) -> Result<MetricGraph> {
    check_genus(g, 2)?;
    let mut edges = bundle(g, bundle_lengths);
    edges.push(edge("pr", "P", "R", &arm));
    edges.push(edge("qs", "Q", "S", &arm));
    edges.push(edge("rs1", "R", "S", &rs[0]));
    edges.push(edge("rs2", "R", "S", &rs[1]));
    build(&["P", "Q", "R", "S"], edges)
}

/// `g - 1` edges from `P` to `Q`, a path `P - R - Q` with both halves of
/// length `half`, a bridge from `R` to `S` and a loop at `S`.
pub fn c3(
    g: usize,
    bundle_lengths: &[Rational],
    half: Rational,
    bridge: Rational,
    loop_length: Rational,
) -> Result<MetricGraph> {
    check_genus(g, 2)?;
    let mut edges = bundle(g, bundle_lengths);
    edges.push(edge("pr", "P", "R", &half));
    edges.push(edge("rq", "R", "Q", &half));
    edges.push(edge("bridge", "R", "S", &bridge));
    edges.push(edge("loop", "S", "S", &loop_length));
    build(&["P", "Q", "R", "S"], edges)
}

/// Complete graph on four vertices with unit edges.
pub fn k4() -> Result<MetricGraph> {
    let names = ["A", "B", "C", "D"];
    let mut edges = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            edges.push(edge(&format!("{}{}", names[i], names[j]), names[i], names[j], &rat(1)));
        }
    }
    build(&names, edges)
}

pub const NAMES: &[&str] = &["segment", "circle", "theta", "banana", "c2", "c2p", "c3", "k4"];

/// Default instance of a named curve; `g` applies to the families.
pub fn by_name(name: &str, g: usize) -> Result<MetricGraph> {
    let lengths: Vec<Rational> = (1..=g as i64 + 1).map(rat).collect();
    match name {
        "segment" => segment(rat(1)),
        "circle" => circle(rat(1)),
        "theta" => theta([rat(1), rat(2), rat(3)]),
        "banana" => banana(g, &lengths),
        "c2" => c2(g, &lengths, rat(1), rat(2)),
        "c2p" => c2_prime(g, &lengths, rat(1), [rat(1), rat(2)]),
        "c3" => c3(g, &lengths, rat(1), rat(2), rat(3)),
        "k4" => k4(),
        _ => Err(Error::Parse(format!("unknown curve '{name}'"))),
    }
}
