#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tropicurve::rational::frac;
use tropicurve::plfunction::distance_function;
use tropicurve::{Divisor, MetricGraph, PLFunction, PointOnGraph, Rational};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Connected multigraph: a random spanning tree plus extra edges, loops
/// and parallel edges included.
pub fn random_graph(rng: &mut ChaCha8Rng, max_vertices: usize, max_extra: usize, max_den: i64) -> MetricGraph {
    let n = rng.gen_range(1..=max_vertices);
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut edges = Vec::new();
    let length = |rng: &mut ChaCha8Rng| {
        let den = rng.gen_range(1..=max_den);
        frac(rng.gen_range(1..=3 * den), den)
    };
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push((format!("e{}", edges.len()), names[u].clone(), names[v].clone(), length(rng)));
    }
    let extra = rng.gen_range(0..=max_extra);
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        edges.push((format!("e{}", edges.len()), names[a].clone(), names[b].clone(), length(rng)));
    }
    MetricGraph::new(names, edges).unwrap()
}

/// A vertex or an interior point whose offset has denominator at most `max_den`.
pub fn random_point(rng: &mut ChaCha8Rng, g: &MetricGraph, max_den: i64) -> PointOnGraph {
    if g.num_edges() == 0 || rng.gen_bool(0.4) {
        return PointOnGraph::Vertex(rng.gen_range(0..g.num_vertices()));
    }
    let e = rng.gen_range(0..g.num_edges());
    let len = g.edge(e).length.clone();
    let den = rng.gen_range(1..=max_den);
    let steps = (&len * Rational::from_integer(den.into())).floor().to_integer();
    let steps: i64 = steps.try_into().unwrap();
    let k = rng.gen_range(0..=steps.max(0));
    g.point(e, frac(k, den)).unwrap()
}

pub fn random_divisor(rng: &mut ChaCha8Rng, g: &MetricGraph, terms: usize, max_coeff: i64, max_den: i64) -> Divisor {
    let mut d = Divisor::zero();
    for _ in 0..rng.gen_range(0..=terms) {
        let p = random_point(rng, g, max_den);
        d.add(p, rng.gen_range(-max_coeff..=max_coeff));
    }
    d
}

pub fn random_effective(rng: &mut ChaCha8Rng, g: &MetricGraph, degree: i64, max_den: i64) -> Divisor {
    let mut d = Divisor::zero();
    for _ in 0..degree {
        let p = random_point(rng, g, max_den);
        d.add(p, 1);
    }
    d
}

/// Integer-slope function built from scaled distance functions by max and min.
pub fn random_function(rng: &mut ChaCha8Rng, g: &MetricGraph, max_den: i64) -> PLFunction {
    let mut f = distance_function(g, &random_point(rng, g, max_den)).scale(rng.gen_range(-2..=2));
    for _ in 0..rng.gen_range(1..=3) {
        let c = frac(rng.gen_range(-6..=6), rng.gen_range(1..=max_den));
        let h = distance_function(g, &random_point(rng, g, max_den))
            .scale(rng.gen_range(-2..=2))
            .scalar_mul(&c);
        f = if rng.gen_bool(0.5) {
            f.tropical_add(&h).unwrap()
        } else {
            f.tropical_min(&h).unwrap()
        };
    }
    f
}
