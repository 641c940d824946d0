//! Continuous piecewise-linear functions with integer slopes ("rational
//! functions" on a tropical curve), together with the tropical-module
//! operations `⊕ = max` and `c ⊙ f = f + c`.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::graph::{Germ, MetricGraph, PointOnGraph, Refinement};
use crate::rational::{as_i64, format_rational, Rational};

/// Per edge, a strictly increasing breakpoint list `(offset, value)` that
/// starts at offset `0` and ends at the edge length; plus one value per
/// vertex. Always stored normalized (collinear breakpoints removed), so
/// `==` is function equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PLFunction {
    vertex_values: Vec<Rational>,
    pieces: Vec<Vec<(Rational, Rational)>>,
}

fn slope(a: &(Rational, Rational), b: &(Rational, Rational)) -> Rational {
    (&b.1 - &a.1) / (&b.0 - &a.0)
}

fn interpolate(list: &[(Rational, Rational)], x: &Rational) -> Rational {
    let i = list.partition_point(|(o, _)| o <= x);
    if i == 0 {
        return list[0].1.clone();
    }
    if i == list.len() {
        return list[list.len() - 1].1.clone();
    }
    let (a, b) = (&list[i - 1], &list[i]);
    if a.0 == *x {
        return a.1.clone();
    }
    &a.1 + slope(a, b) * (x - &a.0)
}

fn normalize_list(list: Vec<(Rational, Rational)>) -> Vec<(Rational, Rational)> {
    let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(list.len());
    for pt in list {
        if out.len() >= 2 {
            let n = out.len();
            if slope(&out[n - 2], &out[n - 1]) == slope(&out[n - 1], &pt) {
                out.pop();
            }
        }
        out.push(pt);
    }
    out
}

impl PLFunction {
    /// Validating constructor.
    pub fn new(
        graph: &MetricGraph,
        vertex_values: Vec<Rational>,
        pieces: Vec<Vec<(Rational, Rational)>>,
    ) -> Result<Self> {
        if vertex_values.len() != graph.num_vertices() || pieces.len() != graph.num_edges() {
            return Err(Error::GraphMismatch);
        }
        for (e, list) in pieces.iter().enumerate() {
            let edge = graph.edge(e);
            let malformed = |why: &str| Error::MalformedFunction(edge.id.clone(), why.to_string());
            if list.len() < 2 {
                return Err(malformed("needs at least two breakpoints"));
            }
            if !list[0].0.is_zero() || list[list.len() - 1].0 != edge.length {
                return Err(malformed("breakpoints must start at 0 and end at the edge length"));
            }
            for w in list.windows(2) {
                if w[0].0 >= w[1].0 {
                    return Err(malformed("offsets must be strictly increasing"));
                }
                if !slope(&w[0], &w[1]).is_integer() {
                    return Err(Error::NonIntegerSlope(edge.id.clone()));
                }
            }
            if list[0].1 != vertex_values[edge.ends[0]] {
                return Err(Error::Discontinuous(graph.vertex_name(edge.ends[0]).to_string()));
            }
            if list[list.len() - 1].1 != vertex_values[edge.ends[1]] {
                return Err(Error::Discontinuous(graph.vertex_name(edge.ends[1]).to_string()));
            }
        }
        Ok(PLFunction {
            vertex_values,
            pieces: pieces.into_iter().map(normalize_list).collect(),
        })
    }

    pub fn constant(graph: &MetricGraph, c: Rational) -> Self {
        PLFunction {
            vertex_values: vec![c.clone(); graph.num_vertices()],
            pieces: graph
                .edges()
                .iter()
                .map(|e| vec![(Rational::zero(), c.clone()), (e.length.clone(), c.clone())])
                .collect(),
        }
    }

    /// The function that is linear on every edge with the given vertex values.
    /// Fails if some edge would get a non-integer slope (loops must carry
    /// equal values at both ends, which they do automatically).
    pub fn from_vertex_values(graph: &MetricGraph, values: Vec<Rational>) -> Result<Self> {
        let pieces = graph
            .edges()
            .iter()
            .map(|e| {
                vec![
                    (Rational::zero(), values[e.ends[0]].clone()),
                    (e.length.clone(), values[e.ends[1]].clone()),
                ]
            })
            .collect();
        PLFunction::new(graph, values, pieces)
    }

    pub fn breakpoints(&self, edge: usize) -> &[(Rational, Rational)] {
        &self.pieces[edge]
    }

    pub fn vertex_value(&self, v: usize) -> &Rational {
        &self.vertex_values[v]
    }

    fn same_shape(&self, other: &PLFunction) -> Result<()> {
        if self.vertex_values.len() != other.vertex_values.len()
            || self.pieces.len() != other.pieces.len()
            || self
                .pieces
                .iter()
                .zip(&other.pieces)
                .any(|(a, b)| a.last().map(|x| &x.0) != b.last().map(|x| &x.0))
        {
            return Err(Error::GraphMismatch);
        }
        Ok(())
    }

    pub fn evaluate(&self, p: &PointOnGraph) -> Rational {
        match p {
            PointOnGraph::Vertex(v) => self.vertex_values[*v].clone(),
            PointOnGraph::Interior { edge, offset } => interpolate(&self.pieces[*edge], offset),
        }
    }

    /// Outgoing slope along a germ at a point.
    pub fn slope_along(&self, p: &PointOnGraph, germ: Germ) -> Rational {
        let list = &self.pieces[germ.edge];
        let at = match p {
            PointOnGraph::Interior { offset, .. } => offset.clone(),
            PointOnGraph::Vertex(_) => {
                if germ.forward {
                    Rational::zero()
                } else {
                    list[list.len() - 1].0.clone()
                }
            }
        };
        if germ.forward {
            let i = list.partition_point(|(o, _)| *o <= at);
            slope(&list[i - 1], &list[i])
        } else {
            let i = list.partition_point(|(o, _)| *o < at);
            -slope(&list[i - 1], &list[i])
        }
    }

    /// `div(f)`: at each point, the sum of the outgoing slopes.
    pub fn principal_divisor(&self, graph: &MetricGraph) -> Divisor {
        let to_int = |r: Rational| as_i64(&r).expect("slopes are validated integers");
        let mut d = Divisor::zero();
        for (e, list) in self.pieces.iter().enumerate() {
            let edge = graph.edge(e);
            let n = list.len();
            d.add(
                PointOnGraph::Vertex(edge.ends[0]),
                to_int(slope(&list[0], &list[1])),
            );
            d.add(
                PointOnGraph::Vertex(edge.ends[1]),
                to_int(-slope(&list[n - 2], &list[n - 1])),
            );
            for i in 1..n - 1 {
                let ord = slope(&list[i], &list[i + 1]) - slope(&list[i - 1], &list[i]);
                d.add(
                    PointOnGraph::Interior {
                        edge: e,
                        offset: list[i].0.clone(),
                    },
                    to_int(ord),
                );
            }
        }
        d
    }

    fn combine(
        &self,
        other: &PLFunction,
        op: impl Fn(&Rational, &Rational) -> Rational,
        with_crossings: bool,
    ) -> Result<PLFunction> {
        self.same_shape(other)?;
        let vertex_values = self
            .vertex_values
            .iter()
            .zip(&other.vertex_values)
            .map(|(a, b)| op(a, b))
            .collect();
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for (fa, fb) in self.pieces.iter().zip(&other.pieces) {
            let mut offsets: BTreeSet<Rational> = fa.iter().map(|p| p.0.clone()).collect();
            offsets.extend(fb.iter().map(|p| p.0.clone()));
            if with_crossings {
                let grid: Vec<Rational> = offsets.iter().cloned().collect();
                for w in grid.windows(2) {
                    let da = interpolate(fa, &w[0]) - interpolate(fb, &w[0]);
                    let db = interpolate(fa, &w[1]) - interpolate(fb, &w[1]);
                    if (da.is_positive() && db.is_negative()) || (da.is_negative() && db.is_positive())
                    {
                        let t = &da / (&da - &db);
                        offsets.insert(&w[0] + t * (&w[1] - &w[0]));
                    }
                }
            }
            let list = offsets
                .into_iter()
                .map(|o| {
                    let v = op(&interpolate(fa, &o), &interpolate(fb, &o));
                    (o, v)
                })
                .collect();
            pieces.push(normalize_list(list));
        }
        Ok(PLFunction {
            vertex_values,
            pieces,
        })
    }

    /// Pointwise sum.
    pub fn plus(&self, other: &PLFunction) -> Result<PLFunction> {
        self.combine(other, |a, b| a + b, false)
    }

    pub fn minus(&self, other: &PLFunction) -> Result<PLFunction> {
        self.combine(other, |a, b| a - b, false)
    }

    /// `f ⊕ g`, the pointwise maximum. Crossing points become breakpoints.
    pub fn tropical_add(&self, other: &PLFunction) -> Result<PLFunction> {
        self.combine(other, |a, b| a.max(b).clone(), true)
    }

    /// Pointwise minimum.
    pub fn tropical_min(&self, other: &PLFunction) -> Result<PLFunction> {
        self.combine(other, |a, b| a.min(b).clone(), true)
    }

    /// `c ⊙ f`, i.e. `f + c`.
    pub fn scalar_mul(&self, c: &Rational) -> PLFunction {
        PLFunction {
            vertex_values: self.vertex_values.iter().map(|v| v + c).collect(),
            pieces: self
                .pieces
                .iter()
                .map(|l| l.iter().map(|(o, v)| (o.clone(), v + c)).collect())
                .collect(),
        }
    }

    /// Multiplication by an integer (keeps slopes integral).
    pub fn scale(&self, k: i64) -> PLFunction {
        let k = Rational::from_integer(k.into());
        let pieces = self
            .pieces
            .iter()
            .map(|l| l.iter().map(|(o, v)| (o.clone(), v * &k)).collect())
            .collect::<Vec<_>>();
        PLFunction {
            vertex_values: self.vertex_values.iter().map(|v| v * &k).collect(),
            pieces: pieces.into_iter().map(normalize_list).collect(),
        }
    }

    pub fn negated(&self) -> PLFunction {
        self.scale(-1)
    }

    /// Every point where the function may attain an extremum: vertices and
    /// interior breakpoints.
    pub fn critical_points(&self) -> Vec<PointOnGraph> {
        let mut out: Vec<PointOnGraph> =
            (0..self.vertex_values.len()).map(PointOnGraph::Vertex).collect();
        for (e, list) in self.pieces.iter().enumerate() {
            for (o, _) in &list[1..list.len() - 1] {
                out.push(PointOnGraph::Interior {
                    edge: e,
                    offset: o.clone(),
                });
            }
        }
        out
    }

    pub fn max_value(&self) -> Rational {
        self.pieces
            .iter()
            .flat_map(|l| l.iter().map(|p| &p.1))
            .chain(self.vertex_values.iter())
            .max()
            .expect("graph has a vertex")
            .clone()
    }

    pub fn min_value(&self) -> Rational {
        self.pieces
            .iter()
            .flat_map(|l| l.iter().map(|p| &p.1))
            .chain(self.vertex_values.iter())
            .min()
            .expect("graph has a vertex")
            .clone()
    }

    pub fn is_constant(&self) -> bool {
        self.max_value() == self.min_value()
    }

    /// The same function on a refined model.
    pub fn pull_back(&self, refinement: &Refinement) -> PLFunction {
        let g = &refinement.graph;
        let mut vertex_values = Vec::with_capacity(g.num_vertices());
        for v in 0..g.num_vertices() {
            let p = refinement.unmap_point(&PointOnGraph::Vertex(v));
            vertex_values.push(self.evaluate(&p));
        }
        let mut pieces = vec![Vec::new(); g.num_edges()];
        for (orig, list) in refinement.pieces.iter().enumerate() {
            let f = &self.pieces[orig];
            for pc in list {
                let mut sub = vec![(Rational::zero(), interpolate(f, &pc.start))];
                for (o, v) in f {
                    if pc.start < *o && *o < pc.end {
                        sub.push((o - &pc.start, v.clone()));
                    }
                }
                sub.push((&pc.end - &pc.start, interpolate(f, &pc.end)));
                pieces[pc.edge] = sub;
            }
        }
        PLFunction {
            vertex_values,
            pieces,
        }
    }

    /// Transports a function on `refinement.graph` back to the original model.
    pub fn push_forward(&self, refinement: &Refinement, original: &MetricGraph) -> PLFunction {
        let vertex_values = (0..original.num_vertices())
            .map(|v| self.vertex_values[v].clone())
            .collect();
        let pieces = refinement
            .pieces
            .iter()
            .map(|list| {
                let mut out: Vec<(Rational, Rational)> = Vec::new();
                for pc in list {
                    for (o, v) in &self.pieces[pc.edge] {
                        let at = &pc.start + o;
                        if out.last().is_some_and(|(last, _)| *last == at) {
                            continue;
                        }
                        out.push((at, v.clone()));
                    }
                }
                normalize_list(out)
            })
            .collect();
        PLFunction {
            vertex_values,
            pieces,
        }
    }

    /// JSON export: rationals as strings, breakpoints per edge id.
    pub fn to_json(&self, graph: &MetricGraph) -> Value {
        let vertices: serde_json::Map<String, Value> = self
            .vertex_values
            .iter()
            .enumerate()
            .map(|(v, x)| (graph.vertex_name(v).to_string(), json!(format_rational(x))))
            .collect();
        let edges: serde_json::Map<String, Value> = self
            .pieces
            .iter()
            .enumerate()
            .map(|(e, list)| {
                let pts: Vec<Value> = list
                    .iter()
                    .map(|(o, v)| json!([format_rational(o), format_rational(v)]))
                    .collect();
                (graph.edge(e).id.clone(), Value::Array(pts))
            })
            .collect();
        json!({ "vertices": vertices, "edges": edges })
    }
}

/// `dist(p, ·)` as a piecewise-linear function (slopes ±1).
pub fn distance_function(graph: &MetricGraph, p: &PointOnGraph) -> PLFunction {
    let refined = graph.refine(std::slice::from_ref(p));
    let source = refined.vertex_of(p);
    let g = &refined.graph;
    let dist = g.vertex_distances(source);
    let mut pieces = Vec::with_capacity(g.num_edges());
    for e in g.edges() {
        let (da, db) = (&dist[e.ends[0]], &dist[e.ends[1]]);
        let len = &e.length;
        let mut list = vec![(Rational::zero(), da.clone())];
        // the two geodesic branches meet where da + s = db + len - s
        let meet = (db + len - da) / Rational::from_integer(2.into());
        if meet.is_positive() && meet < *len {
            let v = da + &meet;
            list.push((meet, v));
        }
        list.push((len.clone(), db.clone()));
        pieces.push(list);
    }
    let f = PLFunction::new(g, dist, pieces).expect("distance has slopes ±1");
    f.push_forward(&refined, graph)
}

/// Checks that `d1 = d2 + div(f)`.
pub fn witnesses(graph: &MetricGraph, d1: &Divisor, d2: &Divisor, f: &PLFunction) -> bool {
    d2.plus(&f.principal_divisor(graph)) == *d1
}

/// `D + div(f) ≥ 0`, i.e. `f ∈ R(D)`.
pub fn in_rd(graph: &MetricGraph, d: &Divisor, f: &PLFunction) -> bool {
    d.plus(&f.principal_divisor(graph)).is_effective()
}
