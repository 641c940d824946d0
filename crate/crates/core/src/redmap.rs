//! The reduced-divisor map `P ↦ D_P` traced exactly along edges.
//!
//! Along an edge the map is integral affine: on each piece a group of
//! `excess` chips travels with the base point, single chips slide away from
//! the boundary of a saturated cut `Y` at speed `excess`, and the rest of the
//! divisor stays put.

use num_traits::{Signed, Zero};

use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::graph::{Germ, MetricGraph, PointOnGraph};
use crate::plfunction::PLFunction;
use crate::rational::{rat, Rational};
use crate::reduction::{cut_from_mask, is_reduced, reduce, Cut};
use crate::workgraph::WorkGraph;

/// A chip sliding from `anchor` along `germ`: at parameter `t` it sits at
/// offset `start_offset ± speed·(t - t0)` on `germ.edge`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MovingChip {
    pub anchor: PointOnGraph,
    pub germ: Germ,
    pub start_offset: Rational,
    pub speed: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceSegment {
    pub edge: usize,
    pub t0: Rational,
    pub t1: Rational,
    /// The saturated cut at the start of the segment; `None` on constant pieces.
    pub cut: Option<Cut>,
    /// Chips that travel with the base point; `0` on constant pieces.
    pub excess: i64,
    pub moving_chips: Vec<MovingChip>,
    pub base_chip_count: i64,
    pub static_part: Divisor,
}

impl TraceSegment {
    pub fn is_constant(&self) -> bool {
        self.cut.is_none()
    }

    /// Red at the base point of parameter `t ∈ [t0, t1]`.
    pub fn assemble(&self, graph: &MetricGraph, t: &Rational) -> Divisor {
        let dt = t - &self.t0;
        let mut d = self.static_part.clone();
        if self.base_chip_count != 0 {
            d.add(
                graph.point(self.edge, t.clone()).expect("parameter within edge"),
                self.base_chip_count,
            );
        }
        for chip in &self.moving_chips {
            d.add(chip.position(graph, &dt), 1);
        }
        d
    }

    pub fn base_point(&self, graph: &MetricGraph, t: &Rational) -> PointOnGraph {
        graph.point(self.edge, t.clone()).expect("parameter within edge")
    }
}

impl MovingChip {
    pub fn position(&self, graph: &MetricGraph, dt: &Rational) -> PointOnGraph {
        let travel = dt * rat(self.speed);
        let offset = if self.germ.forward {
            &self.start_offset + travel
        } else {
            &self.start_offset - travel
        };
        graph.point(self.germ.edge, offset).expect("chip stays on its edge")
    }
}

/// Segments covering `[0, length]` of one edge, in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedTrace {
    pub edge: usize,
    pub segments: Vec<TraceSegment>,
}

impl RedTrace {
    /// Breakpoints `t0` of every segment plus the final `t1`.
    pub fn breakpoints(&self) -> Vec<Rational> {
        let mut out: Vec<Rational> = self.segments.iter().map(|s| s.t0.clone()).collect();
        if let Some(last) = self.segments.last() {
            out.push(last.t1.clone());
        }
        out
    }

    /// Value of the traced map at parameter `t` (the left-most segment containing `t`).
    pub fn value_at(&self, graph: &MetricGraph, t: &Rational) -> Option<Divisor> {
        self.segments
            .iter()
            .find(|s| s.t0 <= *t && *t <= s.t1)
            .map(|s| s.assemble(graph, t))
    }

    /// Adjacent segments agree at their shared parameter.
    pub fn is_continuous(&self, graph: &MetricGraph) -> bool {
        self.segments
            .windows(2)
            .all(|w| w[0].t1 == w[1].t0 && w[0].assemble(graph, &w[0].t1) == w[1].assemble(graph, &w[1].t0))
    }
}

/// `reduce(d, p)` when `|d|` is nonempty.
pub fn red(graph: &MetricGraph, d: &Divisor, p: &PointOnGraph) -> Result<Divisor> {
    let r = reduce(graph, d, p)?;
    if r.divisor.coefficient(p) < 0 {
        return Err(Error::EmptyLinearSystem);
    }
    Ok(r.divisor)
}

/// Reduction witness `f_P` with `D_P = D + div(f_P)` and `f_P(P) = 0`.
pub fn normalized_witness(graph: &MetricGraph, d: &Divisor, p: &PointOnGraph) -> Result<(Divisor, PLFunction)> {
    let r = reduce(graph, d, p)?;
    if r.divisor.coefficient(p) < 0 {
        return Err(Error::EmptyLinearSystem);
    }
    Ok((r.divisor, r.witness))
}

fn germ_offset(graph: &MetricGraph, p: &PointOnGraph, germ: Germ) -> Rational {
    match p {
        PointOnGraph::Interior { offset, .. } => offset.clone(),
        PointOnGraph::Vertex(_) if germ.forward => Rational::zero(),
        PointOnGraph::Vertex(_) => graph.edge(germ.edge).length.clone(),
    }
}

/// Offset of the first point after `from` along `germ` that is a vertex or
/// carries chips of `e`.
fn next_stop(graph: &MetricGraph, e: &Divisor, germ: Germ, from: &Rational) -> Rational {
    let edge = graph.edge(germ.edge);
    let mut best = if germ.forward { edge.length.clone() } else { Rational::zero() };
    for p in e.support() {
        if let PointOnGraph::Interior { edge: pe, offset } = p {
            if *pe != germ.edge {
                continue;
            }
            if germ.forward && offset > from && *offset < best {
                best = offset.clone();
            }
            if !germ.forward && offset < from && *offset > best {
                best = offset.clone();
            }
        }
    }
    best
}

/// Cut `Y` through which the chips of the `P`-reduced divisor `e` leave `p`
/// when the base point moves along `germ`, or `None` when `e` stays reduced.
pub fn maximal_saturated_cut(
    graph: &MetricGraph,
    e: &Divisor,
    p: &PointOnGraph,
    germ: Germ,
) -> Result<Option<Cut>> {
    e.check_on(graph)?;
    graph.check_point(p)?;
    if !graph.germs_at(p).contains(&germ) {
        return Err(Error::InvariantViolation(format!(
            "germ does not start at {}",
            graph.point_name(p)
        )));
    }
    if !is_reduced(graph, e, p)? || e.coefficient(p) < 0 {
        return Err(Error::NotReduced(graph.point_name(p)));
    }
    Ok(cut_beyond(graph, e, p, germ))
}

fn cut_beyond(graph: &MetricGraph, e: &Divisor, p: &PointOnGraph, germ: Germ) -> Option<Cut> {
    let from = germ_offset(graph, p, germ);
    let stop = next_stop(graph, e, germ, &from);
    let q_offset = (&from + &stop) / rat(2);
    let q = graph.point(germ.edge, q_offset).expect("midpoint lies inside the edge");
    let wg = WorkGraph::new(graph, e, &[p.clone(), q.clone()]);
    let (mut mask, _) = wg.burn(wg.vertex_at(&q).expect("auxiliary point is a vertex"));
    let start = wg.vertex_at(p).expect("base point is a vertex");
    if !mask[start] {
        return None;
    }
    // keep the component of the base point
    let mut keep = vec![false; mask.len()];
    keep[start] = true;
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &ed in &wg.adj[v] {
            let w = wg.edges[ed].other(v);
            if mask[w] && !keep[w] {
                keep[w] = true;
                stack.push(w);
            }
        }
    }
    for (m, k) in mask.iter_mut().zip(&keep) {
        *m &= *k;
    }
    Some(cut_from_mask(&wg, &mask))
}

/// Exact trace of `t ↦ Red(point at offset t on edge)` from the first endpoint.
pub fn trace_edge(graph: &MetricGraph, d: &Divisor, edge: usize) -> Result<RedTrace> {
    d.check_on(graph)?;
    if edge >= graph.num_edges() {
        return Err(Error::UnknownEdge(edge.to_string()));
    }
    let length = graph.edge(edge).length.clone();
    let mut segments = Vec::new();
    let mut t0 = Rational::zero();
    while t0 < length {
        let p = graph.point(edge, t0.clone())?;
        let e = red(graph, d, &p)?;
        let seg = segment_at(graph, &e, edge, &t0, &p);
        t0 = seg.t1.clone();
        segments.push(seg);
    }
    Ok(RedTrace { edge, segments })
}

pub fn trace_all(graph: &MetricGraph, d: &Divisor) -> Result<Vec<RedTrace>> {
    (0..graph.num_edges()).map(|e| trace_edge(graph, d, e)).collect()
}

fn segment_at(graph: &MetricGraph, e: &Divisor, edge: usize, t0: &Rational, p: &PointOnGraph) -> TraceSegment {
    let u = Germ { edge, forward: true };
    let n1 = next_stop(graph, e, u, t0);
    let Some(cut) = cut_beyond(graph, e, p, u) else {
        return TraceSegment {
            edge,
            t0: t0.clone(),
            t1: n1,
            cut: None,
            excess: 0,
            moving_chips: Vec::new(),
            base_chip_count: 0,
            static_part: e.clone(),
        };
    };

    let wg = WorkGraph::new(graph, e, std::slice::from_ref(p));
    let in_y = |v: usize| cut.contains(&wg.vertices[v].pos);
    let edge_midpoint = |ed: usize| {
        let w = &wg.edges[ed];
        graph
            .point(w.orig, (&w.offs[0] + &w.offs[1]) / rat(2))
            .expect("midpoint on edge")
    };
    let outgoing = |ed: usize| !cut.contains(&edge_midpoint(ed));
    let start = wg.vertex_at(p).expect("base point is a vertex");
    // the w-edge leaving P along u
    let u_edge = wg.adj[start]
        .iter()
        .copied()
        .find(|&ed| {
            let w = &wg.edges[ed];
            w.orig == edge && w.offset_at(start) == t0 && w.offset_at(w.other(start)) > t0
        })
        .expect("base point has a forward edge");

    let mut static_part = e.clone();
    let mut moving = Vec::new();
    let mut excess = 0;
    let mut delta = &n1 - t0;
    for v in wg.alive_vertices().filter(|&v| in_y(v)) {
        let outs: Vec<usize> = wg.adj[v].iter().copied().filter(|&ed| outgoing(ed)).collect();
        if outs.is_empty() {
            continue;
        }
        let pos = wg.vertices[v].pos.clone();
        if v == start {
            excess = e.coefficient(&pos) - outs.len() as i64 + 1;
            static_part.add(pos.clone(), -e.coefficient(&pos));
        } else {
            static_part.add(pos.clone(), -(outs.len() as i64));
        }
        for ed in outs {
            if v == start && ed == u_edge {
                continue;
            }
            let w = &wg.edges[ed];
            let far = w.other(v);
            let start_offset = w.offset_at(v).clone();
            let forward = *w.offset_at(far) > start_offset;
            moving.push((pos.clone(), Germ { edge: w.orig, forward }, start_offset, ed, far));
        }
    }
    let ex = Rational::from_integer(excess.into());
    for (_, _, _, ed, far) in &moving {
        let len = wg.edges[*ed].length();
        let limit = if *far == start && outgoing(*ed) && is_u_side(&wg, *ed, start, edge, t0) {
            &len / (&ex + rat(1))
        } else if in_y(*far) {
            &len / (&ex * rat(2))
        } else {
            &len / &ex
        };
        if limit < delta {
            delta = limit;
        }
    }
    // a chip coming back along u towards the base point
    let u_far = wg.edges[u_edge].other(start);
    if in_y(u_far) && u_far != start {
        let len = wg.edges[u_edge].length();
        let limit = &len / (&ex + rat(1));
        if limit < delta {
            delta = limit;
        }
    }
    debug_assert!(delta.is_positive());
    TraceSegment {
        edge,
        t0: t0.clone(),
        t1: t0 + &delta,
        cut: Some(cut.clone()),
        excess,
        moving_chips: moving
            .into_iter()
            .map(|(anchor, germ, start_offset, _, _)| MovingChip {
                anchor,
                germ,
                start_offset,
                speed: excess,
            })
            .collect(),
        base_chip_count: excess,
        static_part,
    }
}

fn is_u_side(wg: &WorkGraph, ed: usize, start: usize, edge: usize, t0: &Rational) -> bool {
    let w = &wg.edges[ed];
    w.orig == edge && w.offset_at(start) == t0 && w.offset_at(w.other(start)) > t0
}

/// `(#components of Γ minus the interior support points of e) - 1`.
pub fn cell_dimension(graph: &MetricGraph, e: &Divisor) -> usize {
    let mut cuts: Vec<Vec<&Rational>> = vec![Vec::new(); graph.num_edges()];
    for p in e.support() {
        if let PointOnGraph::Interior { edge, offset } = p {
            cuts[*edge].push(offset);
        }
    }
    let mut parent: Vec<usize> = (0..graph.num_vertices()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut isolated = 0;
    for (i, edge) in graph.edges().iter().enumerate() {
        if cuts[i].is_empty() {
            let (a, b) = (find(&mut parent, edge.ends[0]), find(&mut parent, edge.ends[1]));
            parent[a] = b;
        } else {
            isolated += cuts[i].len() - 1;
        }
    }
    let roots = (0..graph.num_vertices()).filter(|&v| find(&mut parent, v) == v).count();
    roots + isolated - 1
}

/// Every traced divisor (segment ends and midpoints) lies in a cell of dimension at most one.
pub fn one_skeleton_check(graph: &MetricGraph, traces: &[RedTrace]) -> bool {
    traces.iter().flat_map(|t| &t.segments).all(|s| {
        let mid = (&s.t0 + &s.t1) / rat(2);
        let ok = [&s.t0, &mid, &s.t1]
            .into_iter()
            .all(|t| cell_dimension(graph, &s.assemble(graph, t)) <= 1);
        ok
    })
}

/// A zero-dimensional point of the traced image with its normalized witness.
#[derive(Debug, Clone)]
pub struct Generator {
    pub base: PointOnGraph,
    pub divisor: Divisor,
    pub function: PLFunction,
}

/// Trace values at segment ends lying in zero-dimensional cells, deduplicated.
pub fn vertex_generators(graph: &MetricGraph, d: &Divisor) -> Result<Vec<Generator>> {
    let traces = trace_all(graph, d)?;
    let mut out: Vec<Generator> = Vec::new();
    for s in traces.iter().flat_map(|t| &t.segments) {
        for t in [&s.t0, &s.t1] {
            let div = s.assemble(graph, t);
            if cell_dimension(graph, &div) != 0 || out.iter().any(|g| g.divisor == div) {
                continue;
            }
            let base = s.base_point(graph, t);
            let (divisor, function) = normalized_witness(graph, d, &base)?;
            out.push(Generator {
                base,
                divisor,
                function,
            });
        }
    }
    Ok(out)
}

/// `f = (a ⊙ f1) ⊕ (b ⊙ f2)` up to an additive constant for some `a`, `b`.
pub fn is_tropical_combination(f: &PLFunction, f1: &PLFunction, f2: &PLFunction) -> bool {
    let a = f.minus(f1).map(|h| h.min_value());
    let b = f.minus(f2).map(|h| h.min_value());
    let (Ok(a), Ok(b)) = (a, b) else {
        return false;
    };
    f1.scalar_mul(&a)
        .tropical_add(&f2.scalar_mul(&b))
        .is_ok_and(|m| m == *f)
}

/// `(f(P))` over the generators; defined up to a common additive constant.
pub fn phi_coordinates(p: &PointOnGraph, generators: &[Generator]) -> Vec<Rational> {
    generators.iter().map(|g| g.function.evaluate(p)).collect()
}

/// `f^t_Q(P) = -f_P(Q)`.
pub fn dual_eval(graph: &MetricGraph, d: &Divisor, q: &PointOnGraph, p: &PointOnGraph) -> Result<Rational> {
    let (_, f) = normalized_witness(graph, d, p)?;
    Ok(-f.evaluate(q))
}
