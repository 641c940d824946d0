//! Weierstrass loci, very ampleness through injectivity of the reduced
//! divisor map, and curves whose canonical divisor is not very ample.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::graph::{MetricGraph, PointOnGraph};
use crate::rank::{has_nonneg_rank, rank};
use crate::rational::{frac, rat, Rational};
use crate::redmap::{red, trace_all, RedTrace, TraceSegment};

/// Closed subset of the curve made of closed intervals and isolated points
/// on edges (offsets strictly inside the edge unless an interval reaches an
/// end) and a list of vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Locus {
    pub intervals: Vec<Vec<(Rational, Rational)>>,
    pub points: Vec<Vec<Rational>>,
    pub vertices: Vec<usize>,
}

impl Locus {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
            && self.intervals.iter().all(Vec::is_empty)
            && self.points.iter().all(Vec::is_empty)
    }

    pub fn contains(&self, p: &PointOnGraph) -> bool {
        match p {
            PointOnGraph::Vertex(v) => self.vertices.contains(v),
            PointOnGraph::Interior { edge, offset } => {
                self.points[*edge].contains(offset)
                    || self.intervals[*edge]
                        .iter()
                        .any(|(a, b)| a <= offset && offset <= b)
            }
        }
    }
}

fn check_genus(graph: &MetricGraph) -> Result<usize> {
    let g = graph.genus();
    if g < 2 {
        return Err(Error::GenusTooSmall(g));
    }
    Ok(g)
}

/// Coefficient of `K_P` at `P`, checked against the lower bound `g - 1`.
pub fn canonical_base_coefficient(graph: &MetricGraph, p: &PointOnGraph) -> Result<i64> {
    let g = check_genus(graph)? as i64;
    let a = red(graph, &graph.canonical_divisor(), p)?.coefficient(p);
    if a < g - 1 {
        return Err(Error::InvariantViolation(format!(
            "K reduced at {} has coefficient {a} < g - 1",
            graph.point_name(p)
        )));
    }
    Ok(a)
}

/// `P` is a Weierstrass point: `K_P(P) ≥ g`.
pub fn weierstrass_test(graph: &MetricGraph, p: &PointOnGraph) -> Result<bool> {
    let g = graph.genus() as i64;
    Ok(canonical_base_coefficient(graph, p)? >= g)
}

/// `{P : D_P(P) ≥ threshold}` from the traces of `d`, with every breakpoint
/// and vertex checked by a direct reduction.
pub fn locus_with_threshold(graph: &MetricGraph, d: &Divisor, threshold: i64) -> Result<Locus> {
    let traces = trace_all(graph, d)?;
    locus_from_traces(graph, d, &traces, threshold)
}

pub(crate) fn locus_from_traces(
    graph: &MetricGraph,
    d: &Divisor,
    traces: &[RedTrace],
    threshold: i64,
) -> Result<Locus> {
    let at = |p: &PointOnGraph| -> Result<bool> { Ok(red(graph, d, p)?.coefficient(p) >= threshold) };
    let vertices: Vec<usize> = (0..graph.num_vertices())
        .filter_map(|v| match at(&PointOnGraph::Vertex(v)) {
            Ok(true) => Some(Ok(v)),
            Ok(false) => None,
            Err(e) => Some(Err(e)),
        })
        .collect::<Result<_>>()?;
    let mut intervals = vec![Vec::new(); graph.num_edges()];
    let mut points = vec![Vec::new(); graph.num_edges()];
    for tr in traces {
        let e = tr.edge;
        let len = &graph.edge(e).length;
        let member = |t: &Rational| -> Result<bool> {
            if t.is_zero() {
                Ok(vertices.contains(&graph.edge(e).ends[0]))
            } else if t == len {
                Ok(vertices.contains(&graph.edge(e).ends[1]))
            } else {
                at(&graph.point(e, t.clone())?)
            }
        };
        let mut open: Vec<(Rational, Rational)> = Vec::new();
        for s in &tr.segments {
            if interior_coefficient(s) >= threshold {
                match open.last_mut() {
                    Some(last) if last.1 == s.t0 => last.1 = s.t1.clone(),
                    _ => open.push((s.t0.clone(), s.t1.clone())),
                }
            }
        }
        for (a, b) in &open {
            if !member(a)? || !member(b)? {
                return Err(Error::InvariantViolation(format!(
                    "locus on edge {} is not closed at [{a}, {b}]",
                    graph.edge(e).id
                )));
            }
        }
        for t in tr.breakpoints() {
            if t.is_positive() && t < *len && !open.iter().any(|(a, b)| *a <= t && t <= *b) && member(&t)? {
                points[e].push(t);
            }
        }
        points[e].sort();
        points[e].dedup();
        intervals[e] = open;
    }
    Ok(Locus {
        intervals,
        points,
        vertices,
    })
}

/// Coefficient of `D_P` at `P` for `P` inside the segment.
fn interior_coefficient(s: &TraceSegment) -> i64 {
    if s.is_constant() {
        0
    } else {
        s.base_chip_count
    }
}

pub fn weierstrass_locus(graph: &MetricGraph) -> Result<Locus> {
    let g = check_genus(graph)? as i64;
    locus_with_threshold(graph, &graph.canonical_divisor(), g)
}

/// Weierstrass points of `d`: `D_P(P) ≥ r(D) + 1`. Empty when `|D|` is empty.
pub fn d_weierstrass_locus(graph: &MetricGraph, d: &Divisor) -> Result<Locus> {
    let r = rank(graph, d)?.rank;
    if r < 0 {
        return Ok(Locus {
            intervals: vec![Vec::new(); graph.num_edges()],
            points: vec![Vec::new(); graph.num_edges()],
            vertices: Vec::new(),
        });
    }
    locus_with_threshold(graph, d, r + 1)
}

/// Descent on `F(P) = min dist(P, P_i)` over the other support points of
/// `K_P` (zero at Weierstrass points), restricted to trace breakpoints and
/// segment midpoints; each step goes to the nearest strictly better candidate.
pub fn descent_weierstrass(graph: &MetricGraph) -> Result<PointOnGraph> {
    let g = check_genus(graph)? as i64;
    let k = graph.canonical_divisor();
    let traces = trace_all(graph, &k)?;
    let mut candidates: BTreeSet<PointOnGraph> = BTreeSet::new();
    for s in traces.iter().flat_map(|t| &t.segments) {
        let mid = (&s.t0 + &s.t1) / rat(2);
        for t in [&s.t0, &mid, &s.t1] {
            candidates.insert(s.base_point(graph, t));
        }
    }
    let score = |p: &PointOnGraph| -> Result<Rational> {
        let kp = red(graph, &k, p)?;
        if kp.coefficient(p) >= g {
            return Ok(Rational::zero());
        }
        let mut best: Option<Rational> = None;
        for q in kp.support().filter(|q| *q != p) {
            let d = graph.distance(p, q)?;
            if best.as_ref().is_none_or(|b| d < *b) {
                best = Some(d);
            }
        }
        Ok(best.expect("K_P has degree 2g - 2 > g - 1"))
    };
    let scored: Vec<(PointOnGraph, Rational)> = candidates
        .into_iter()
        .map(|p| score(&p).map(|f| (p, f)))
        .collect::<Result<_>>()?;
    let mut current = PointOnGraph::Vertex(0);
    let mut f = score(&current)?;
    while f.is_positive() {
        let mut next: Option<(Rational, usize)> = None;
        for (i, (q, fq)) in scored.iter().enumerate() {
            if *fq < f {
                let d = graph.distance(&current, q)?;
                if next.as_ref().is_none_or(|(bd, _)| d < *bd) {
                    next = Some((d, i));
                }
            }
        }
        let (_, i) = next.ok_or_else(|| {
            Error::InvariantViolation("descent stalled before reaching a Weierstrass point".into())
        })?;
        current = scored[i].0.clone();
        f = scored[i].1.clone();
    }
    Ok(current)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VeryAmpleness {
    pub very_ample: bool,
    /// Distinct points with the same reduced divisor.
    pub witness: Option<(PointOnGraph, PointOnGraph)>,
}

fn is_banana_like(graph: &MetricGraph) -> bool {
    match graph.coarsest_model() {
        None => true,
        Some(m) => {
            m.num_vertices() == 2 && m.edges().iter().all(|e| e.ends[0] != e.ends[1])
        }
    }
}

/// Whether `Red` is injective, with a colliding pair when it is not.
pub fn is_very_ample(graph: &MetricGraph, d: &Divisor) -> Result<VeryAmpleness> {
    d.check_on(graph)?;
    if !has_nonneg_rank(graph, d)? {
        return Err(Error::EmptyLinearSystem);
    }
    let g = graph.genus() as i64;
    let deg = d.degree();
    if deg > 2 * g || (g >= 1 && deg == 2 * g && !is_banana_like(graph)) {
        return Ok(VeryAmpleness {
            very_ample: true,
            witness: None,
        });
    }
    very_ample_exact(graph, d)
}

/// Decides injectivity from the traces alone, without the degree shortcuts.
pub fn very_ample_exact(graph: &MetricGraph, d: &Divisor) -> Result<VeryAmpleness> {
    let traces = trace_all(graph, d)?;
    let segments: Vec<&TraceSegment> = traces.iter().flat_map(|t| &t.segments).collect();
    let found = |p: PointOnGraph, q: PointOnGraph| VeryAmpleness {
        very_ample: false,
        witness: Some((p, q)),
    };
    if graph.num_edges() == 0 {
        return Ok(VeryAmpleness {
            very_ample: true,
            witness: None,
        });
    }
    for s in &segments {
        if s.is_constant() {
            let mid = (&s.t0 + &s.t1) / rat(2);
            return Ok(found(s.base_point(graph, &s.t0), s.base_point(graph, &mid)));
        }
    }
    for (i, a) in segments.iter().enumerate() {
        for b in &segments[i..] {
            if let Some((p, q)) = collide(graph, a, b) {
                return Ok(found(p, q));
            }
        }
    }
    Ok(VeryAmpleness {
        very_ample: true,
        witness: None,
    })
}

/// Chips of a segment at offset `off0 + vel·(x - x0)` on `edge`.
#[derive(Debug, Clone)]
struct Track {
    edge: usize,
    off0: Rational,
    vel: Rational,
}

fn tracks(s: &TraceSegment) -> (Vec<Track>, Divisor) {
    let mut moving = vec![Track {
        edge: s.edge,
        off0: s.t0.clone(),
        vel: rat(1),
    }];
    for c in &s.moving_chips {
        let v = rat(c.speed);
        moving.push(Track {
            edge: c.germ.edge,
            off0: c.start_offset.clone(),
            vel: if c.germ.forward { v } else { -v },
        });
    }
    (moving, s.static_part.clone())
}

fn offsets_on(graph: &MetricGraph, p: &PointOnGraph, edge: usize) -> Vec<Rational> {
    let e = graph.edge(edge);
    match p {
        PointOnGraph::Vertex(v) => {
            let mut out = Vec::new();
            if e.ends[0] == *v {
                out.push(Rational::zero());
            }
            if e.ends[1] == *v {
                out.push(e.length.clone());
            }
            out
        }
        PointOnGraph::Interior { edge: pe, offset } if *pe == edge => vec![offset.clone()],
        PointOnGraph::Interior { .. } => Vec::new(),
    }
}

fn within(x: &Rational, lo: &Rational, hi: &Rational) -> bool {
    lo <= x && x <= hi
}

/// Parameters of `s` at which its base point sits at one of `points`.
fn base_params(graph: &MetricGraph, s: &TraceSegment, points: &[PointOnGraph]) -> Vec<Rational> {
    let mut out = vec![s.t0.clone(), s.t1.clone()];
    for p in points {
        for o in offsets_on(graph, p, s.edge) {
            if within(&o, &s.t0, &s.t1) {
                out.push(o);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

fn check_pair(
    graph: &MetricGraph,
    a: &TraceSegment,
    s: &Rational,
    b: &TraceSegment,
    t: &Rational,
) -> Option<(PointOnGraph, PointOnGraph)> {
    let (p, q) = (a.base_point(graph, s), b.base_point(graph, t));
    (p != q && a.assemble(graph, s) == b.assemble(graph, t)).then_some((p, q))
}

/// Exact search for `s, t` with `A(s) = B(t)` and distinct base points.
fn collide(graph: &MetricGraph, a: &TraceSegment, b: &TraceSegment) -> Option<(PointOnGraph, PointOnGraph)> {
    // any collision puts A's base point on a chip of B(t) and vice versa
    let fixed_s = |s: &Rational| -> Option<(PointOnGraph, PointOnGraph)> {
        let da = a.assemble(graph, s);
        let pts: Vec<PointOnGraph> = da.support().cloned().collect();
        base_params(graph, b, &pts)
            .iter()
            .find_map(|t| check_pair(graph, a, s, b, t))
    };
    let fixed_t = |t: &Rational| -> Option<(PointOnGraph, PointOnGraph)> {
        let db = b.assemble(graph, t);
        let pts: Vec<PointOnGraph> = db.support().cloned().collect();
        base_params(graph, a, &pts)
            .iter()
            .find_map(|s| check_pair(graph, a, s, b, t))
    };

    let (tracks_b, static_b) = tracks(b);
    let (tracks_a, static_a) = tracks(a);
    let static_b_pts: Vec<PointOnGraph> = static_b.support().cloned().collect();
    let static_a_pts: Vec<PointOnGraph> = static_a.support().cloned().collect();
    for s in base_params(graph, a, &static_b_pts) {
        if let Some(hit) = fixed_s(&s) {
            return Some(hit);
        }
    }
    for t in base_params(graph, b, &static_a_pts) {
        if let Some(hit) = fixed_t(&t) {
            return Some(hit);
        }
    }
    // A's base rides along a moving chip group of B on the same edge:
    // t0_a + (s - t0_a) = off0 + vel (t - t0_b), i.e. s = off0 + vel (t - t0_b)
    for tr in &tracks_b {
        if tr.edge != a.edge || tr.vel.is_zero() {
            continue;
        }
        if let Some(hit) = line_search(graph, a, b, &tracks_a, &tracks_b, tr) {
            return Some(hit);
        }
    }
    None
}

fn line_search(
    graph: &MetricGraph,
    a: &TraceSegment,
    b: &TraceSegment,
    tracks_a: &[Track],
    tracks_b: &[Track],
    along: &Track,
) -> Option<(PointOnGraph, PointOnGraph)> {
    // s(t) = along.off0 + along.vel (t - b.t0)
    let s_of = |t: &Rational| &along.off0 + &along.vel * (t - &b.t0);
    let t_of = |s: &Rational| &b.t0 + (s - &along.off0) / &along.vel;
    let (mut lo, mut hi) = (b.t0.clone(), b.t1.clone());
    let (x, y) = (t_of(&a.t0), t_of(&a.t1));
    let (x, y) = if x <= y { (x, y) } else { (y, x) };
    if x > lo {
        lo = x;
    }
    if y < hi {
        hi = y;
    }
    if lo > hi {
        return None;
    }
    // every chip position as an affine function of t along the line
    let mut lines: Vec<(usize, Rational, Rational)> = Vec::new();
    for tr in tracks_a {
        // offset = off0 + vel (s - a.t0) with s = s_of(t)
        let c0 = &tr.off0 + &tr.vel * (s_of(&b.t0) - &a.t0);
        let c1 = &tr.vel * &along.vel;
        lines.push((tr.edge, c0, c1));
    }
    for tr in tracks_b {
        lines.push((tr.edge, tr.off0.clone(), tr.vel.clone()));
    }
    // value at t is c0 + c1 (t - b.t0)
    let mut times = vec![lo.clone(), hi.clone()];
    for (i, (e1, p0, p1)) in lines.iter().enumerate() {
        let len = &graph.edge(*e1).length;
        if !p1.is_zero() {
            for end in [Rational::zero(), len.clone()] {
                times.push(&b.t0 + (&end - p0) / p1);
            }
        }
        for (e2, q0, q1) in &lines[i + 1..] {
            if e1 == e2 && p1 != q1 {
                times.push(&b.t0 + (q0 - p0) / (p1 - q1));
            }
        }
    }
    for p in a.static_part.support().chain(b.static_part.support()) {
        for (e, c0, c1) in &lines {
            if c1.is_zero() {
                continue;
            }
            for o in offsets_on(graph, p, *e) {
                times.push(&b.t0 + (&o - c0) / c1);
            }
        }
    }
    times.retain(|t| within(t, &lo, &hi));
    times.sort();
    times.dedup();
    let mut probes = times.clone();
    for w in times.windows(2) {
        probes.push((&w[0] + &w[1]) / rat(2));
    }
    probes
        .iter()
        .find_map(|t| check_pair(graph, a, &s_of(t), b, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CanonicalCase {
    VeryAmple,
    CI,
    CII,
    CIIPrime,
    CIII,
}

impl CanonicalCase {
    pub fn label(&self) -> &'static str {
        match self {
            CanonicalCase::VeryAmple => "VeryAmple",
            CanonicalCase::CI => "C.I",
            CanonicalCase::CII => "C.II",
            CanonicalCase::CIIPrime => "C.II'",
            CanonicalCase::CIII => "C.III",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalClass {
    pub case: CanonicalCase,
    pub witness: Option<(PointOnGraph, PointOnGraph)>,
}

struct Coarse<'a> {
    m: &'a MetricGraph,
}

impl Coarse<'_> {
    fn edges_between(&self, a: usize, b: usize) -> Vec<&Rational> {
        self.m
            .edges()
            .iter()
            .filter(|e| (e.ends[0] == a && e.ends[1] == b) || (e.ends[0] == b && e.ends[1] == a))
            .map(|e| &e.length)
            .collect()
    }

    fn degree(&self, v: usize) -> usize {
        self.m.germs_at(&PointOnGraph::Vertex(v)).len()
    }

    fn single(&self, a: usize, b: usize) -> Option<&Rational> {
        let list = self.edges_between(a, b);
        (list.len() == 1).then(|| list[0])
    }
}

/// Tries the families on the coarsest model with `P`, `Q` of degree `g`.
fn match_family(m: &MetricGraph, g: usize) -> Option<(CanonicalCase, usize, usize)> {
    let c = Coarse { m };
    let n = m.num_vertices();
    if n == 2 && m.edges().iter().all(|e| e.ends[0] != e.ends[1]) && m.num_edges() == g + 1 {
        return Some((CanonicalCase::CI, 0, 1));
    }
    for p in 0..n {
        for q in 0..n {
            if p == q || c.degree(p) != g || c.degree(q) != g || c.edges_between(p, q).len() != g - 1 {
                continue;
            }
            let others: Vec<usize> = (0..n).filter(|&v| v != p && v != q).collect();
            match others.as_slice() {
                &[r] => {
                    // P-R, R-Q of equal length and a loop at R
                    if let (Some(pr), Some(rq)) = (c.single(p, r), c.single(r, q)) {
                        if pr == rq && c.edges_between(r, r).len() == 1 && c.degree(r) == 4 {
                            return Some((CanonicalCase::CII, p, q));
                        }
                    }
                }
                [r, s] => {
                    for (r, s) in [(*r, *s), (*s, *r)] {
                        if c.degree(r) != 3 || c.degree(s) != 3 {
                            continue;
                        }
                        // P-R, Q-S of equal length and two R-S edges
                        if let (Some(pr), Some(qs)) = (c.single(p, r), c.single(q, s)) {
                            if pr == qs && c.edges_between(r, s).len() == 2 {
                                return Some((CanonicalCase::CIIPrime, p, q));
                            }
                        }
                        // P-R, R-Q of equal length, bridge R-S and a loop at S
                        if let (Some(pr), Some(rq)) = (c.single(p, r), c.single(r, q)) {
                            if pr == rq && c.single(r, s).is_some() && c.edges_between(s, s).len() == 1 {
                                return Some((CanonicalCase::CIII, p, q));
                            }
                        }
                    }
                }
                _ => {}
            }
        }
    }
    None
}

/// Genus-two witness: a point whose `K_P` is `(P) + (Q)` with `K_Q` equal to it.
fn genus_two_witness(graph: &MetricGraph) -> Result<Option<(PointOnGraph, PointOnGraph)>> {
    let k = graph.canonical_divisor();
    let mut candidates: Vec<PointOnGraph> = (0..graph.num_vertices()).map(PointOnGraph::Vertex).collect();
    for (e, edge) in graph.edges().iter().enumerate() {
        for (n, d) in [(1, 4), (1, 3), (1, 2)] {
            candidates.push(graph.point(e, &edge.length * frac(n, d))?);
        }
    }
    for p in candidates {
        let kp = red(graph, &k, &p)?;
        if kp.coefficient(&p) != 1 {
            continue;
        }
        let q = kp.support().find(|q| **q != p).cloned().expect("K_P has degree 2");
        if red(graph, &k, &q)? == kp {
            return Ok(Some((p, q)));
        }
    }
    Ok(None)
}

/// Which family, if any, makes `K` fail to be very ample.
pub fn canonical_classification(graph: &MetricGraph) -> Result<CanonicalClass> {
    let g = check_genus(graph)?;
    for v in 0..graph.num_vertices() {
        if graph.germs_at(&PointOnGraph::Vertex(v)).len() == 1 {
            return Err(Error::HasLeaves(graph.vertex_name(v).to_string()));
        }
    }
    let m = graph.coarsest_model().expect("genus at least two has branch points");
    let k = graph.canonical_divisor();
    let (case, witness) = if g == 2 {
        let witness = genus_two_witness(graph)?;
        let case = match (m.num_vertices(), m.edges().iter().filter(|e| e.is_loop()).count()) {
            (2, 0) => CanonicalCase::CI,
            (1, _) => CanonicalCase::CII,
            _ => CanonicalCase::CIII,
        };
        (case, witness)
    } else {
        match match_family(&m, g) {
            Some((case, p, q)) => {
                let p = graph.vertex_id(m.vertex_name(p))?;
                let q = graph.vertex_id(m.vertex_name(q))?;
                (case, Some((PointOnGraph::Vertex(p), PointOnGraph::Vertex(q))))
            }
            None => (CanonicalCase::VeryAmple, None),
        }
    };
    let ample = is_very_ample(graph, &k)?.very_ample;
    if ample != (case == CanonicalCase::VeryAmple) {
        return Err(Error::InvariantViolation(format!(
            "classification {} disagrees with the injectivity test",
            case.label()
        )));
    }
    if let Some((p, q)) = &witness {
        let expected = Divisor::from_terms([(p.clone(), g as i64 - 1), (q.clone(), g as i64 - 1)]);
        if red(graph, &k, p)? != expected || red(graph, &k, q)? != expected {
            return Err(Error::InvariantViolation("witness pair fails K_P = K_Q = (g-1)(P) + (g-1)(Q)".into()));
        }
    } else if case != CanonicalCase::VeryAmple {
        return Err(Error::InvariantViolation("no witness pair found".into()));
    }
    Ok(CanonicalClass { case, witness })
}
