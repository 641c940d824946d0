//! Reduced divisors: burning, reduction with a witness function, and an
//! independent combinatorial oracle on a unit subdivision.

use std::collections::{BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::graph::{Germ, MetricGraph, PointOnGraph};
use crate::plfunction::PLFunction;
use crate::rational::{lcm_of_denominators, Rational};
use crate::workgraph::WorkGraph;

/// Environment variable capping the number of nodes of the oracle's subdivision.
pub const ORACLE_BUDGET_VAR: &str = "TROPICURVE_ORACLE_BUDGET";
pub const DEFAULT_ORACLE_BUDGET: usize = 20_000;

/// A closed subset of the curve: fully contained vertices plus closed
/// intervals (possibly degenerate) on each edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    pub vertices: BTreeSet<usize>,
    pub intervals: Vec<Vec<(Rational, Rational)>>,
}

impl Cut {
    pub fn empty(graph: &MetricGraph) -> Self {
        Cut {
            vertices: BTreeSet::new(),
            intervals: vec![Vec::new(); graph.num_edges()],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.intervals.iter().all(Vec::is_empty)
    }

    pub fn contains(&self, p: &PointOnGraph) -> bool {
        match p {
            PointOnGraph::Vertex(v) => self.vertices.contains(v),
            PointOnGraph::Interior { edge, offset } => self.intervals[*edge]
                .iter()
                .any(|(a, b)| a <= offset && offset <= b),
        }
    }

    fn germ_inside(&self, graph: &MetricGraph, p: &PointOnGraph, germ: Germ) -> bool {
        let at = match p {
            PointOnGraph::Interior { offset, .. } => offset.clone(),
            PointOnGraph::Vertex(_) if germ.forward => Rational::zero(),
            PointOnGraph::Vertex(_) => graph.edge(germ.edge).length.clone(),
        };
        self.intervals[germ.edge].iter().any(|(a, b)| {
            if germ.forward {
                *a <= at && at < *b
            } else {
                *a < at && at <= *b
            }
        })
    }

    /// Germs at `p` that leave the cut.
    pub fn outgoing_germs(&self, graph: &MetricGraph, p: &PointOnGraph) -> Vec<Germ> {
        graph
            .germs_at(p)
            .into_iter()
            .filter(|&g| !self.germ_inside(graph, p, g))
            .collect()
    }

    /// Points of the cut with at least one outgoing germ. Boundary points
    /// of a closed set with finitely many pieces are interval endpoints or vertices.
    pub fn boundary(&self, graph: &MetricGraph) -> Vec<PointOnGraph> {
        let mut candidates: BTreeSet<PointOnGraph> =
            self.vertices.iter().map(|&v| PointOnGraph::Vertex(v)).collect();
        for (e, list) in self.intervals.iter().enumerate() {
            for (a, b) in list {
                for x in [a, b] {
                    candidates.insert(graph.point(e, x.clone()).expect("interval within edge"));
                }
            }
        }
        candidates
            .into_iter()
            .filter(|p| !self.outgoing_germs(graph, p).is_empty())
            .collect()
    }
}

/// Number of edge-germs at the boundary point `v` that exit `x`.
pub fn out_degree(graph: &MetricGraph, x: &Cut, v: &PointOnGraph) -> Result<usize> {
    graph.check_point(v)?;
    let n = x.outgoing_germs(graph, v).len();
    if !x.contains(v) || n == 0 {
        return Err(Error::NotOnBoundary(graph.point_name(v)));
    }
    Ok(n)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BurnReport {
    /// The maximal saturated cut avoiding the source, when one exists.
    pub unburnt: Option<Cut>,
    /// Chip-holding points that burnt, in burning order.
    pub witnesses: Vec<PointOnGraph>,
}

pub(crate) fn cut_from_mask(wg: &WorkGraph, mask: &[bool]) -> Cut {
    let g = wg.graph;
    let mut cut = Cut::empty(g);
    for v in wg.alive_vertices().filter(|&v| mask[v]) {
        match &wg.vertices[v].pos {
            PointOnGraph::Vertex(u) => {
                cut.vertices.insert(*u);
            }
            PointOnGraph::Interior { edge, offset } => {
                cut.intervals[*edge].push((offset.clone(), offset.clone()));
            }
        }
    }
    for edge in wg.edges.iter().filter(|e| e.alive) {
        if mask[edge.ends[0]] && mask[edge.ends[1]] {
            let (a, b) = if edge.offs[0] < edge.offs[1] {
                (edge.offs[0].clone(), edge.offs[1].clone())
            } else {
                (edge.offs[1].clone(), edge.offs[0].clone())
            };
            cut.intervals[edge.orig].push((a, b));
        }
    }
    for list in &mut cut.intervals {
        list.sort();
        let mut merged: Vec<(Rational, Rational)> = Vec::new();
        for (a, b) in list.drain(..) {
            match merged.last_mut() {
                Some(last) if a <= last.1 => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => merged.push((a, b)),
            }
        }
        *list = merged;
    }
    cut
}

/// Dhar burning from `v0`.
pub fn burn(graph: &MetricGraph, d: &Divisor, v0: &PointOnGraph) -> Result<BurnReport> {
    d.check_on(graph)?;
    graph.check_point(v0)?;
    if let Some((p, _)) = d.terms().find(|(p, c)| *c < 0 && *p != v0) {
        return Err(Error::NegativeOutsideBase(graph.point_name(p)));
    }
    let wg = WorkGraph::new(graph, d, std::slice::from_ref(v0));
    let source = wg.vertex_at(v0).expect("base point is a vertex");
    let (mask, witnesses) = wg.burn(source);
    let unburnt = mask.iter().any(|&b| b).then(|| cut_from_mask(&wg, &mask));
    Ok(BurnReport {
        unburnt,
        witnesses: witnesses.into_iter().map(|v| wg.vertices[v].pos.clone()).collect(),
    })
}

/// `d` is `v0`-reduced.
pub fn is_reduced(graph: &MetricGraph, d: &Divisor, v0: &PointOnGraph) -> Result<bool> {
    if d.terms().any(|(p, c)| c < 0 && p != v0) {
        return Ok(false);
    }
    Ok(burn(graph, d, v0)?.unburnt.is_none())
}

/// Sorted (ascending) multiset of distances from chips to the base point.
/// Chips that reached the base point count as zeros.
pub type ReductionPotential = Vec<Rational>;

#[derive(Debug, Clone)]
pub struct Reduction {
    pub divisor: Divisor,
    /// `divisor = input + div(witness)`, normalized to vanish at the base point.
    pub witness: PLFunction,
    /// Steps used to make the divisor effective away from the base point.
    pub effective_steps: usize,
    /// Cut firings performed by the burning phase.
    pub phases: usize,
    /// Potential before the burning phase and after each firing.
    pub potentials: Vec<ReductionPotential>,
}

fn potential(wg: &WorkGraph, dist: &[Rational], source: usize, at_source: i64) -> ReductionPotential {
    let mut out = Vec::new();
    for v in wg.alive_vertices() {
        let c = wg.vertices[v].chips;
        if v == source {
            continue;
        }
        for _ in 0..c.max(0) {
            out.push(dist[v].clone());
        }
    }
    for _ in 0..(wg.vertices[source].chips - at_source).max(0) {
        out.push(Rational::zero());
    }
    out.sort();
    out
}

/// Computes the unique `v0`-reduced divisor linearly equivalent to `d`.
pub fn reduce(graph: &MetricGraph, d: &Divisor, v0: &PointOnGraph) -> Result<Reduction> {
    reduce_impl(graph, d, v0, false)
}

/// Like [`reduce`] but also records the potential after every firing.
pub fn reduce_traced(graph: &MetricGraph, d: &Divisor, v0: &PointOnGraph) -> Result<Reduction> {
    reduce_impl(graph, d, v0, true)
}

fn reduce_impl(graph: &MetricGraph, d: &Divisor, v0: &PointOnGraph, record: bool) -> Result<Reduction> {
    d.check_on(graph)?;
    graph.check_point(v0)?;
    let mut wg = WorkGraph::new(graph, d, std::slice::from_ref(v0));
    let source = wg.vertex_at(v0).expect("base point is a vertex");
    let effective_steps = make_effective(&mut wg, source);
    wg.merge_trivial();

    let at_source = wg.vertices[source].chips;
    let mut potentials = Vec::new();
    let mut phases = 0;
    loop {
        let dist = if record { wg.distances(source) } else { Vec::new() };
        if record {
            potentials.push(potential(&wg, &dist, source, at_source));
        }
        let (mask, _) = wg.burn(source);
        if !mask.iter().any(|&b| b) {
            break;
        }
        fire_cut(&mut wg, &mask);
        phases += 1;
        wg.merge_trivial();
    }

    let mut witness = wg.function();
    let shift = -witness.evaluate(v0);
    witness = witness.scalar_mul(&shift);
    Ok(Reduction {
        divisor: wg.divisor(),
        witness,
        effective_steps,
        phases,
        potentials,
    })
}

/// Adds functions `-a·min(dist(v0, ·), R)` for decreasing radii `R` until
/// every chip count away from `v0` is nonnegative. A point at distance
/// exactly `R` gains `a` per germ pointing towards `v0`, points farther than
/// `R` are untouched, and only points closer than `R` can lose chips.
fn make_effective(wg: &mut WorkGraph, source: usize) -> usize {
    let negative = |wg: &WorkGraph| {
        wg.alive_vertices()
            .any(|v| v != source && wg.vertices[v].chips < 0)
    };
    if !negative(wg) {
        return 0;
    }
    // make the distance function linear on every edge
    let dist = wg.distances(source);
    let edges: Vec<usize> = (0..wg.edges.len()).filter(|&e| wg.edges[e].alive).collect();
    for e in edges {
        let [a, b] = wg.edges[e].ends;
        let len = wg.edges[e].length();
        let s = (&dist[b] + &len - &dist[a]) / Rational::from_integer(2.into());
        if s.is_positive() && s < len {
            wg.split(e, a, &s);
        }
    }
    let mut steps = 0;
    loop {
        let dist = wg.distances(source);
        let Some(radius) = wg
            .alive_vertices()
            .filter(|&v| v != source && wg.vertices[v].chips < 0)
            .map(|v| dist[v].clone())
            .max()
        else {
            break;
        };
        let debt = wg
            .alive_vertices()
            .filter(|&v| v != source && dist[v] == radius)
            .map(|v| -wg.vertices[v].chips)
            .max()
            .expect("some vertex at this radius is in debt");
        let edges: Vec<usize> = (0..wg.edges.len()).filter(|&e| wg.edges[e].alive).collect();
        for e in edges {
            let [a, b] = wg.edges[e].ends;
            let (near, far) = if dist[a] < dist[b] { (a, b) } else { (b, a) };
            if dist[near] < radius && radius < dist[far] {
                let s = &radius - &dist[near];
                wg.split(e, near, &s);
            }
        }
        let dist = wg.distances(source);
        let a = Rational::from_integer(debt.into());
        let h: Vec<Rational> = dist
            .iter()
            .map(|d| -(&a * d.clone().min(radius.clone())))
            .collect();
        wg.apply(&h);
        steps += 1;
    }
    steps
}

/// Fires the unburnt set by the largest step that keeps every outgoing
/// edge's far end fixed: boundary chips slide outward by `ε`.
fn fire_cut(wg: &mut WorkGraph, mask: &[bool]) {
    let outgoing: Vec<(usize, usize)> = (0..wg.edges.len())
        .filter(|&e| wg.edges[e].alive)
        .filter_map(|e| {
            let [a, b] = wg.edges[e].ends;
            match (mask[a], mask[b]) {
                (true, false) => Some((e, a)),
                (false, true) => Some((e, b)),
                _ => None,
            }
        })
        .collect();
    let eps = outgoing
        .iter()
        .map(|&(e, _)| wg.edges[e].length())
        .min()
        .expect("a proper cut has an outgoing edge");
    let mut inside = mask.to_vec();
    for &(e, from) in &outgoing {
        if wg.edges[e].length() > eps {
            wg.split(e, from, &eps);
        }
    }
    inside.resize(wg.vertices.len(), false);
    let h: Vec<Rational> = inside
        .iter()
        .map(|&i| if i { Rational::zero() } else { -eps.clone() })
        .collect();
    wg.apply(&h);
}

/// Linear-equivalence test through reduction at the first vertex. Returns
/// `f` with `d1 = d2 + div(f)` when the divisors are equivalent.
pub fn lin_equiv(graph: &MetricGraph, d1: &Divisor, d2: &Divisor) -> Result<Option<PLFunction>> {
    d1.check_on(graph)?;
    d2.check_on(graph)?;
    if d1.degree() != d2.degree() {
        return Ok(None);
    }
    let base = PointOnGraph::Vertex(0);
    let r1 = reduce(graph, d1, &base)?;
    let r2 = reduce(graph, d2, &base)?;
    if r1.divisor != r2.divisor {
        return Ok(None);
    }
    // r = d1 + div(f1) = d2 + div(f2), so d1 = d2 + div(f2 - f1)
    Ok(Some(r2.witness.minus(&r1.witness)?))
}

/// Node budget for [`oracle_reduce`], read from the environment.
pub fn oracle_budget() -> usize {
    std::env::var(ORACLE_BUDGET_VAR)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_ORACLE_BUDGET)
}

/// Reduction on the finite graph obtained by scaling all lengths to
/// integers and subdividing into unit segments.
pub fn oracle_reduce(graph: &MetricGraph, d: &Divisor, v0: &PointOnGraph) -> Result<Divisor> {
    oracle_reduce_with_budget(graph, d, v0, oracle_budget())
}

pub fn oracle_reduce_with_budget(
    graph: &MetricGraph,
    d: &Divisor,
    v0: &PointOnGraph,
    budget: usize,
) -> Result<Divisor> {
    d.check_on(graph)?;
    graph.check_point(v0)?;
    let mut values: Vec<&Rational> = graph.edges().iter().map(|e| &e.length).collect();
    for p in d.support().chain(std::iter::once(v0)) {
        if let PointOnGraph::Interior { offset, .. } = p {
            values.push(offset);
        }
    }
    let m = lcm_of_denominators(values);
    let units: Vec<BigInt> = graph
        .edges()
        .iter()
        .map(|e| (&e.length * Rational::from_integer(m.clone())).to_integer())
        .collect();
    let mut nodes = BigInt::from(graph.num_vertices());
    for u in &units {
        nodes += u - 1;
    }
    let budget_exceeded = || Error::OracleInfeasible {
        nodes: nodes.to_usize().unwrap_or(usize::MAX),
        budget,
    };
    let n = nodes.to_usize().ok_or_else(budget_exceeded)?;
    if n > budget {
        return Err(budget_exceeded());
    }

    // node k of edge e (1 <= k < units) sits at offset k/m
    let mut first_inner = Vec::with_capacity(units.len());
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut next = graph.num_vertices();
    for (e, edge) in graph.edges().iter().enumerate() {
        let u = units[e].to_usize().expect("bounded by budget");
        first_inner.push(next);
        let mut prev = edge.ends[0];
        for _ in 1..u {
            adj[prev].push(next);
            adj[next].push(prev);
            prev = next;
            next += 1;
        }
        if prev != edge.ends[1] {
            adj[prev].push(edge.ends[1]);
            adj[edge.ends[1]].push(prev);
        }
    }
    let node_of = |p: &PointOnGraph| -> usize {
        match p {
            PointOnGraph::Vertex(v) => *v,
            PointOnGraph::Interior { edge, offset } => {
                let k = (offset * Rational::from_integer(m.clone()))
                    .to_integer()
                    .to_usize()
                    .expect("bounded by budget");
                first_inner[*edge] + k - 1
            }
        }
    };
    let mut chips = vec![0i64; n];
    for (p, c) in d.terms() {
        chips[node_of(p)] += c;
    }
    let q = node_of(v0);
    discrete_reduce(&adj, &mut chips, q);

    let mut out = Divisor::zero();
    for (v, &c) in chips.iter().enumerate().take(graph.num_vertices()) {
        out.add(PointOnGraph::Vertex(v), c);
    }
    for (e, &start) in first_inner.iter().enumerate() {
        let u = units[e].to_usize().expect("bounded by budget");
        for k in 1..u {
            let c = chips[start + k - 1];
            if c != 0 {
                let offset = Rational::new(BigInt::from(k), m.clone());
                out.add(graph.point(e, offset).expect("unit node on edge"), c);
            }
        }
    }
    Ok(out)
}

fn fire_set(adj: &[Vec<usize>], chips: &mut [i64], inside: &[bool], times: i64) {
    for v in 0..adj.len() {
        if !inside[v] {
            continue;
        }
        for &w in &adj[v] {
            if !inside[w] {
                chips[v] -= times;
                chips[w] += times;
            }
        }
    }
}

/// Classical reduction on a finite multigraph: fire balls around `q` to
/// clear debt farthest first, then fire Dhar's unburnt set until none remains.
fn discrete_reduce(adj: &[Vec<usize>], chips: &mut [i64], q: usize) {
    let n = adj.len();
    let mut dist = vec![usize::MAX; n];
    dist[q] = 0;
    let mut queue = VecDeque::from([q]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    let max_dist = dist.iter().copied().max().unwrap_or(0);
    for r in (0..max_dist).rev() {
        let inside: Vec<bool> = dist.iter().map(|&d| d <= r).collect();
        let mut times = 0i64;
        for v in (0..n).filter(|&v| dist[v] == r + 1 && chips[v] < 0) {
            let into = adj[v].iter().filter(|&&w| inside[w]).count() as i64;
            times = times.max((-chips[v] + into - 1) / into);
        }
        if times > 0 {
            fire_set(adj, chips, &inside, times);
        }
    }
    loop {
        let mut burnt = vec![false; n];
        let mut hits = vec![0i64; n];
        burnt[q] = true;
        let mut stack = vec![q];
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if burnt[w] {
                    continue;
                }
                hits[w] += 1;
                if hits[w] > chips[w] {
                    burnt[w] = true;
                    stack.push(w);
                }
            }
        }
        if burnt.iter().all(|&b| b) {
            break;
        }
        let inside: Vec<bool> = burnt.iter().map(|&b| !b).collect();
        fire_set(adj, chips, &inside, 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plfunction::witnesses;
    use crate::rational::{frac, rat};

    fn theta(l: [i64; 3]) -> MetricGraph {
        MetricGraph::from_spec(
            &["P", "Q"],
            &[
                ("e1", "P", "Q", rat(l[0])),
                ("e2", "P", "Q", rat(l[1])),
                ("e3", "P", "Q", rat(l[2])),
            ],
        )
        .unwrap()
    }

    fn circle() -> MetricGraph {
        MetricGraph::from_spec(&["O"], &[("c", "O", "O", rat(4))]).unwrap()
    }

    fn parse(g: &MetricGraph, s: &str) -> Divisor {
        Divisor::parse(s, g).unwrap()
    }

    #[test]
    fn out_degrees() {
        let g = theta([1, 1, 1]);
        let mut edge_cut = Cut::empty(&g);
        edge_cut.vertices.extend([0, 1]);
        edge_cut.intervals[0].push((rat(0), rat(1)));
        assert_eq!(out_degree(&g, &edge_cut, &PointOnGraph::Vertex(0)).unwrap(), 2);
        assert_eq!(out_degree(&g, &edge_cut, &PointOnGraph::Vertex(1)).unwrap(), 2);
        let mut q = Cut::empty(&g);
        q.vertices.insert(1);
        assert_eq!(out_degree(&g, &q, &PointOnGraph::Vertex(1)).unwrap(), 3);
        let mut inner = Cut::empty(&g);
        inner.intervals[1].push((frac(1, 2), frac(1, 2)));
        assert_eq!(out_degree(&g, &inner, &g.point(1, frac(1, 2)).unwrap()).unwrap(), 2);
        assert!(out_degree(&g, &inner, &PointOnGraph::Vertex(0)).is_err());
    }

    #[test]
    fn burning() {
        let g = theta([1, 1, 1]);
        let p = PointOnGraph::Vertex(0);
        assert!(burn(&g, &Divisor::zero(), &p).unwrap().unburnt.is_none());
        assert!(burn(&g, &parse(&g, "2*(Q)"), &p).unwrap().unburnt.is_none());
        let report = burn(&g, &parse(&g, "3*(Q)"), &p).unwrap();
        let cut = report.unburnt.unwrap();
        assert!(cut.contains(&PointOnGraph::Vertex(1)));
        assert_eq!(cut.boundary(&g), vec![PointOnGraph::Vertex(1)]);
        assert!(burn(&g, &parse(&g, "-1*(Q)"), &p).is_err());
    }

    #[test]
    fn reduce_fixed_cases() {
        let g = theta([1, 1, 1]);
        let q = PointOnGraph::Vertex(1);
        let d = parse(&g, "2*(P)");
        let r = reduce(&g, &d, &q).unwrap();
        assert!(witnesses(&g, &r.divisor, &d, &r.witness));
        assert_eq!(r.divisor, oracle_reduce(&g, &d, &q).unwrap());
        assert!(is_reduced(&g, &r.divisor, &q).unwrap());

        let k = g.canonical_divisor();
        assert_eq!(reduce(&g, &k, &PointOnGraph::Vertex(0)).unwrap().divisor, k);

        let c = circle();
        let d = parse(&c, "2*(c@1)");
        let r = reduce(&c, &d, &PointOnGraph::Vertex(0)).unwrap();
        assert_eq!(r.divisor, parse(&c, "(O) + (c@2)"));
        assert!(witnesses(&c, &r.divisor, &d, &r.witness));
    }

    #[test]
    fn reduce_negative_input() {
        let g = theta([1, 2, 3]);
        let d = parse(&g, "-2*(e3@1/2) + 3*(e2@3/2) - 1*(Q)");
        for base in [PointOnGraph::Vertex(0), g.point(0, frac(1, 2)).unwrap()] {
            let r = reduce_traced(&g, &d, &base).unwrap();
            assert!(witnesses(&g, &r.divisor, &d, &r.witness));
            assert!(r.divisor.is_effective_outside(&base));
            assert!(is_reduced(&g, &r.divisor, &base).unwrap() || r.divisor.coefficient(&base) < 0);
            assert_eq!(r.divisor, oracle_reduce(&g, &d, &base).unwrap());
            for w in r.potentials.windows(2) {
                assert!(w[1] < w[0]);
            }
            let again = reduce(&g, &r.divisor, &base).unwrap();
            assert_eq!(again.divisor, r.divisor);
            assert!(again.witness.is_constant());
        }
    }

    #[test]
    fn lin_equiv_on_segment() {
        let g = MetricGraph::from_spec(&["A", "B"], &[("e", "A", "B", rat(2))]).unwrap();
        let d1 = parse(&g, "(A)");
        let d2 = parse(&g, "(e@1/3)");
        let f = lin_equiv(&g, &d1, &d2).unwrap().unwrap();
        assert!(witnesses(&g, &d1, &d2, &f));
        assert!(lin_equiv(&g, &d1, &parse(&g, "2*(B)")).unwrap().is_none());
    }

    #[test]
    fn oracle_budget_is_enforced() {
        let g = theta([100, 100, 100]);
        let r = oracle_reduce_with_budget(&g, &Divisor::zero(), &PointOnGraph::Vertex(0), 50);
        assert!(matches!(r, Err(Error::OracleInfeasible { .. })));
    }
}
