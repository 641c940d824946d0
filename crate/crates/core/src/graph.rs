//! Compact tropical curves given by a model: a finite connected multigraph
//! whose edges carry exact positive rational lengths. Loops and parallel
//! edges are allowed.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::fmt;

use num_traits::{Signed, Zero};

use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, rat, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    /// Offsets are measured from `ends[0]` towards `ends[1]`.
    pub ends: [usize; 2],
    pub length: Rational,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.ends[0] == self.ends[1]
    }
}

/// A point of the geometric realization, in canonical form: offsets `0`
/// and `length` are always stored as the corresponding vertex.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PointOnGraph {
    Vertex(usize),
    Interior { edge: usize, offset: Rational },
}

impl PointOnGraph {
    pub fn is_vertex(&self) -> bool {
        matches!(self, PointOnGraph::Vertex(_))
    }
}

/// A unit tangent direction at a point. `forward` germs point towards
/// increasing offset along `edge`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Germ {
    pub edge: usize,
    pub forward: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricGraph {
    vertex_names: Vec<String>,
    edges: Vec<Edge>,
    vertex_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
}

impl MetricGraph {
    /// Builds and validates a model. `edges` holds `(id, first end, second end, length)`.
    pub fn new(
        vertices: Vec<String>,
        edges: Vec<(String, String, String, Rational)>,
    ) -> Result<Self> {
        Self::build(vertices, edges, true)
    }

    // Refined models name their new vertices `edge@offset`, which user input may not.
    fn build(
        vertices: Vec<String>,
        edges: Vec<(String, String, String, Rational)>,
        strict_names: bool,
    ) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut vertex_index = HashMap::new();
        for (i, name) in vertices.iter().enumerate() {
            if (strict_names && name.contains('@')) || name.contains('(') || name.contains(')') {
                return Err(Error::Parse(format!("invalid vertex name {name:?}")));
            }
            if vertex_index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateId(name.clone()));
            }
        }
        let mut edge_index = HashMap::new();
        let mut out = Vec::with_capacity(edges.len());
        for (i, (id, a, b, length)) in edges.into_iter().enumerate() {
            if id.contains('@') || vertex_index.contains_key(&id) {
                return Err(Error::DuplicateId(id));
            }
            if edge_index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateId(id));
            }
            let a = *vertex_index.get(&a).ok_or(Error::UnknownVertex(a))?;
            let b = *vertex_index.get(&b).ok_or(Error::UnknownVertex(b))?;
            if !length.is_positive() {
                return Err(Error::InvalidLength {
                    edge: id,
                    reason: format!("length {} is not positive", format_rational(&length)),
                });
            }
            out.push(Edge {
                id,
                ends: [a, b],
                length,
            });
        }
        let graph = MetricGraph {
            vertex_names: vertices,
            edges: out,
            vertex_index,
            edge_index,
        };
        graph.check_connected()?;
        Ok(graph)
    }

    /// Convenience constructor from string slices and `(num, den)` lengths.
    pub fn from_spec(vertices: &[&str], edges: &[(&str, &str, &str, Rational)]) -> Result<Self> {
        MetricGraph::new(
            vertices.iter().map(|s| s.to_string()).collect(),
            edges
                .iter()
                .map(|(id, a, b, l)| (id.to_string(), a.to_string(), b.to_string(), l.clone()))
                .collect(),
        )
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.vertex_names.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let adjacency = self.vertex_neighbors();
        while let Some(v) = stack.pop() {
            for &w in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(v) => Err(Error::Disconnected(self.vertex_names[v].clone())),
            None => Ok(()),
        }
    }

    fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_names.len()];
        for e in &self.edges {
            adj[e.ends[0]].push(e.ends[1]);
            adj[e.ends[1]].push(e.ends[0]);
        }
        adj
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertex_names[v]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertex_names
    }

    pub fn vertex_id(&self, name: &str) -> Result<usize> {
        self.vertex_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn edge_id(&self, name: &str) -> Result<usize> {
        self.edge_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownEdge(name.to_string()))
    }

    /// `g = |E| - |V| + 1`.
    pub fn genus(&self) -> usize {
        self.edges.len() + 1 - self.vertex_names.len()
    }

    /// Canonical point at `offset` along edge `e`.
    pub fn point(&self, e: usize, offset: Rational) -> Result<PointOnGraph> {
        let edge = self
            .edges
            .get(e)
            .ok_or_else(|| Error::UnknownEdge(e.to_string()))?;
        if offset.is_negative() || offset > edge.length {
            return Err(Error::OffsetOutOfRange {
                edge: edge.id.clone(),
                offset: format_rational(&offset),
                length: format_rational(&edge.length),
            });
        }
        Ok(if offset.is_zero() {
            PointOnGraph::Vertex(edge.ends[0])
        } else if offset == edge.length {
            PointOnGraph::Vertex(edge.ends[1])
        } else {
            PointOnGraph::Interior { edge: e, offset }
        })
    }

    pub fn check_point(&self, p: &PointOnGraph) -> Result<()> {
        match p {
            PointOnGraph::Vertex(v) if *v < self.num_vertices() => Ok(()),
            PointOnGraph::Vertex(v) => Err(Error::UnknownVertex(v.to_string())),
            PointOnGraph::Interior { edge, offset } => {
                let canonical = self.point(*edge, offset.clone())?;
                if &canonical == p {
                    Ok(())
                } else {
                    Err(Error::OffsetOutOfRange {
                        edge: self.edges[*edge].id.clone(),
                        offset: format_rational(offset),
                        length: format_rational(&self.edges[*edge].length),
                    })
                }
            }
        }
    }

    /// All tangent directions at `p`; a loop contributes two germs at its vertex.
    pub fn germs_at(&self, p: &PointOnGraph) -> Vec<Germ> {
        match p {
            PointOnGraph::Vertex(v) => {
                let mut out = Vec::new();
                for (i, e) in self.edges.iter().enumerate() {
                    if e.ends[0] == *v {
                        out.push(Germ {
                            edge: i,
                            forward: true,
                        });
                    }
                    if e.ends[1] == *v {
                        out.push(Germ {
                            edge: i,
                            forward: false,
                        });
                    }
                }
                out
            }
            PointOnGraph::Interior { edge, .. } => vec![
                Germ {
                    edge: *edge,
                    forward: true,
                },
                Germ {
                    edge: *edge,
                    forward: false,
                },
            ],
        }
    }

    /// Number of edge-germs at `p`.
    pub fn degree(&self, p: &PointOnGraph) -> Result<usize> {
        self.check_point(p)?;
        Ok(self.germs_at(p).len())
    }

    /// Offset of `p` along edge `e`, if `p` lies on the closed edge. For a
    /// vertex that is both ends (loops) the first end is reported.
    pub fn offset_on(&self, p: &PointOnGraph, e: usize) -> Option<Rational> {
        let edge = &self.edges[e];
        match p {
            PointOnGraph::Vertex(v) if edge.ends[0] == *v => Some(Rational::zero()),
            PointOnGraph::Vertex(v) if edge.ends[1] == *v => Some(edge.length.clone()),
            PointOnGraph::Vertex(_) => None,
            PointOnGraph::Interior { edge: f, offset } if *f == e => Some(offset.clone()),
            PointOnGraph::Interior { .. } => None,
        }
    }

    /// `K = Σ (deg(v) - 2)(v)` over the vertices of this model.
    pub fn canonical_divisor(&self) -> Divisor {
        let mut k = Divisor::zero();
        for v in 0..self.num_vertices() {
            let p = PointOnGraph::Vertex(v);
            let d = self.germs_at(&p).len() as i64;
            k.add(p, d - 2);
        }
        k
    }

    /// Exact shortest-path distances from vertex `source` to all vertices.
    pub fn vertex_distances(&self, source: usize) -> Vec<Rational> {
        let mut adj: Vec<Vec<(usize, &Rational)>> = vec![Vec::new(); self.num_vertices()];
        for e in &self.edges {
            if !e.is_loop() {
                adj[e.ends[0]].push((e.ends[1], &e.length));
                adj[e.ends[1]].push((e.ends[0], &e.length));
            }
        }
        let mut dist: Vec<Option<Rational>> = vec![None; self.num_vertices()];
        let mut heap = BinaryHeap::new();
        dist[source] = Some(Rational::zero());
        heap.push(Reverse((Rational::zero(), source)));
        while let Some(Reverse((d, v))) = heap.pop() {
            if dist[v].as_ref().is_some_and(|best| *best < d) {
                continue;
            }
            for &(w, len) in &adj[v] {
                let nd = &d + len;
                if dist[w].as_ref().is_none_or(|cur| nd < *cur) {
                    dist[w] = Some(nd.clone());
                    heap.push(Reverse((nd, w)));
                }
            }
        }
        dist.into_iter()
            .map(|d| d.expect("graph is connected"))
            .collect()
    }

    /// Length of a shortest path between two points.
    pub fn distance(&self, p: &PointOnGraph, q: &PointOnGraph) -> Result<Rational> {
        self.check_point(p)?;
        self.check_point(q)?;
        if p == q {
            return Ok(Rational::zero());
        }
        let refined = self.refine(&[p.clone(), q.clone()]);
        let a = refined.vertex_of(p);
        let b = refined.vertex_of(q);
        Ok(refined.graph.vertex_distances(a)[b].clone())
    }

    /// Subdivides edges so that every point of `points` becomes a vertex.
    /// New interior vertices are named `edge@offset`; split edges are named
    /// `edge.0`, `edge.1`, ... in offset order and keep the orientation of
    /// the original edge.
    pub fn refine(&self, points: &[PointOnGraph]) -> Refinement {
        let mut cuts: BTreeMap<usize, BTreeSet<Rational>> = BTreeMap::new();
        for p in points {
            if let PointOnGraph::Interior { edge, offset } = p {
                cuts.entry(*edge).or_default().insert(offset.clone());
            }
        }
        let mut names = self.vertex_names.clone();
        let mut edges = Vec::new();
        let mut pieces = Vec::with_capacity(self.edges.len());
        let mut new_vertex = HashMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            let Some(offsets) = cuts.get(&i) else {
                pieces.push(vec![Piece {
                    edge: edges.len(),
                    start: Rational::zero(),
                    end: e.length.clone(),
                }]);
                edges.push((
                    e.id.clone(),
                    self.vertex_names[e.ends[0]].clone(),
                    self.vertex_names[e.ends[1]].clone(),
                    e.length.clone(),
                ));
                continue;
            };
            let mut chain = vec![(Rational::zero(), self.vertex_names[e.ends[0]].clone())];
            for off in offsets {
                let name = format!("{}@{}", e.id, format_rational(off));
                new_vertex.insert(
                    PointOnGraph::Interior {
                        edge: i,
                        offset: off.clone(),
                    },
                    names.len(),
                );
                names.push(name.clone());
                chain.push((off.clone(), name));
            }
            chain.push((e.length.clone(), self.vertex_names[e.ends[1]].clone()));
            let mut list = Vec::new();
            for (k, w) in chain.windows(2).enumerate() {
                list.push(Piece {
                    edge: edges.len(),
                    start: w[0].0.clone(),
                    end: w[1].0.clone(),
                });
                edges.push((
                    format!("{}.{}", e.id, k),
                    w[0].1.clone(),
                    w[1].1.clone(),
                    &w[1].0 - &w[0].0,
                ));
            }
            pieces.push(list);
        }
        let graph = MetricGraph::build(names, edges, false).expect("refinement of a valid graph is valid");
        Refinement {
            graph,
            pieces,
            new_vertex,
            original_vertices: self.num_vertices(),
        }
    }

    /// Subdivides every loop at its midpoint.
    pub fn loopless_model(&self) -> MetricGraph {
        let mids: Vec<PointOnGraph> = self
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_loop())
            .map(|(i, e)| PointOnGraph::Interior {
                edge: i,
                offset: &e.length / rat(2),
            })
            .collect();
        if mids.is_empty() {
            self.clone()
        } else {
            self.refine(&mids).graph
        }
    }

    /// Renders a point as `"P"` or `"e1@1/3"`.
    pub fn point_name(&self, p: &PointOnGraph) -> String {
        match p {
            PointOnGraph::Vertex(v) => self.vertex_names[*v].clone(),
            PointOnGraph::Interior { edge, offset } => {
                format!("{}@{}", self.edges[*edge].id, format_rational(offset))
            }
        }
    }

    pub fn parse_point(&self, text: &str) -> Result<PointOnGraph> {
        let text = text.trim();
        if let Some(&v) = self.vertex_index.get(text) {
            return Ok(PointOnGraph::Vertex(v));
        }
        match text.split_once('@') {
            Some((edge, offset)) => {
                let e = self.edge_id(edge.trim())?;
                self.point(e, parse_rational(offset)?)
            }
            None => Ok(PointOnGraph::Vertex(self.vertex_id(text)?)),
        }
    }

    /// Vertices of degree different from two, or `None` for a circle.
    pub fn branch_vertices(&self) -> Vec<usize> {
        (0..self.num_vertices())
            .filter(|&v| self.germs_at(&PointOnGraph::Vertex(v)).len() != 2)
            .collect()
    }

    /// Coarsest model: all degree-two vertices are smoothed away. Returns
    /// `None` when the curve is a circle (no coarsest model exists) or a
    /// single point. Merged edges are named after their constituents joined
    /// by `+`.
    pub fn coarsest_model(&self) -> Option<MetricGraph> {
        let keep: BTreeSet<usize> = self.branch_vertices().into_iter().collect();
        if keep.is_empty() {
            return None;
        }
        let mut used = vec![false; self.edges.len()];
        let mut edges = Vec::new();
        for &v in &keep {
            for germ in self.germs_at(&PointOnGraph::Vertex(v)) {
                if used[germ.edge] {
                    continue;
                }
                // walk through degree-two vertices until a kept vertex
                let mut ids = Vec::new();
                let mut length = Rational::zero();
                let mut current = germ;
                let end = loop {
                    used[current.edge] = true;
                    let e = &self.edges[current.edge];
                    ids.push(e.id.clone());
                    length += &e.length;
                    let far = if current.forward { e.ends[1] } else { e.ends[0] };
                    if keep.contains(&far) {
                        break far;
                    }
                    let next = self
                        .germs_at(&PointOnGraph::Vertex(far))
                        .into_iter()
                        .find(|g| !used[g.edge])
                        .expect("degree-two vertex has a second germ");
                    current = next;
                };
                edges.push((
                    ids.join("+"),
                    self.vertex_names[v].clone(),
                    self.vertex_names[end].clone(),
                    length,
                ));
            }
        }
        let names = keep.iter().map(|&v| self.vertex_names[v].clone()).collect();
        Some(MetricGraph::build(names, edges, false).expect("coarsening keeps the graph valid"))
    }
}

impl fmt::Display for MetricGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "vertices [{}]; edges", self.vertex_names.join(", "))?;
        for e in &self.edges {
            write!(
                f,
                " {}:{}-{}({})",
                e.id,
                self.vertex_names[e.ends[0]],
                self.vertex_names[e.ends[1]],
                format_rational(&e.length)
            )?;
        }
        Ok(())
    }
}

/// One sub-edge of a refined model, located on its original edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub edge: usize,
    pub start: Rational,
    pub end: Rational,
}

/// A refined model together with the relabeling between old and new points.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub graph: MetricGraph,
    /// For each original edge, its sub-edges in increasing offset order.
    pub pieces: Vec<Vec<Piece>>,
    new_vertex: HashMap<PointOnGraph, usize>,
    original_vertices: usize,
}

impl Refinement {
    /// New canonical form of an old point.
    pub fn map_point(&self, p: &PointOnGraph) -> PointOnGraph {
        match p {
            PointOnGraph::Vertex(v) => PointOnGraph::Vertex(*v),
            PointOnGraph::Interior { edge, offset } => {
                if let Some(&v) = self.new_vertex.get(p) {
                    return PointOnGraph::Vertex(v);
                }
                let piece = self.pieces[*edge]
                    .iter()
                    .find(|pc| pc.start < *offset && *offset < pc.end)
                    .expect("offset lies in some piece");
                PointOnGraph::Interior {
                    edge: piece.edge,
                    offset: offset - &piece.start,
                }
            }
        }
    }

    /// Vertex index of a point that was passed to `refine` (or an old vertex).
    pub fn vertex_of(&self, p: &PointOnGraph) -> usize {
        match self.map_point(p) {
            PointOnGraph::Vertex(v) => v,
            PointOnGraph::Interior { .. } => panic!("point was not refined into a vertex"),
        }
    }

    /// Old canonical form of a point of the refined graph.
    pub fn unmap_point(&self, p: &PointOnGraph) -> PointOnGraph {
        match p {
            PointOnGraph::Vertex(v) if *v < self.original_vertices => PointOnGraph::Vertex(*v),
            PointOnGraph::Vertex(v) => self
                .new_vertex
                .iter()
                .find(|(_, &idx)| idx == *v)
                .map(|(p, _)| p.clone())
                .expect("refined vertex has an origin"),
            PointOnGraph::Interior { edge, offset } => {
                for (orig, list) in self.pieces.iter().enumerate() {
                    if let Some(pc) = list.iter().find(|pc| pc.edge == *edge) {
                        return PointOnGraph::Interior {
                            edge: orig,
                            offset: &pc.start + offset,
                        };
                    }
                }
                unreachable!("refined edge has an origin")
            }
        }
    }
}
