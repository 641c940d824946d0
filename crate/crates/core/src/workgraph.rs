//! Mutable loopless model used while chips move: vertices carry chips and
//! the value of an accumulated piecewise-linear function, which is linear
//! on every edge.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use num_traits::{Signed, Zero};

use crate::divisor::Divisor;
use crate::graph::{MetricGraph, PointOnGraph};
use crate::plfunction::PLFunction;
use crate::rational::{as_i64, rat, Rational};

#[derive(Debug, Clone)]
pub(crate) struct WVertex {
    pub pos: PointOnGraph,
    pub chips: i64,
    pub f: Rational,
    pub alive: bool,
    pub protected: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct WEdge {
    pub ends: [usize; 2],
    pub orig: usize,
    /// Offsets of `ends[0]` and `ends[1]` on the original edge.
    pub offs: [Rational; 2],
    pub alive: bool,
}

impl WEdge {
    pub fn length(&self) -> Rational {
        (&self.offs[1] - &self.offs[0]).abs()
    }

    pub fn other(&self, v: usize) -> usize {
        if self.ends[0] == v {
            self.ends[1]
        } else {
            self.ends[0]
        }
    }

    pub fn offset_at(&self, v: usize) -> &Rational {
        if self.ends[0] == v {
            &self.offs[0]
        } else {
            &self.offs[1]
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct WorkGraph<'g> {
    pub graph: &'g MetricGraph,
    pub vertices: Vec<WVertex>,
    pub edges: Vec<WEdge>,
    pub adj: Vec<Vec<usize>>,
    index: HashMap<PointOnGraph, usize>,
}

impl<'g> WorkGraph<'g> {
    /// Model with every point of `divisor`, every point of `extra` and the
    /// midpoint of every loop as vertices. Original vertices and `extra` are
    /// protected from merging.
    pub fn new(graph: &'g MetricGraph, divisor: &Divisor, extra: &[PointOnGraph]) -> Self {
        let mut wg = WorkGraph {
            graph,
            vertices: Vec::new(),
            edges: Vec::new(),
            adj: Vec::new(),
            index: HashMap::new(),
        };
        for v in 0..graph.num_vertices() {
            wg.push_vertex(PointOnGraph::Vertex(v), true);
        }
        let mut cuts: Vec<Vec<(Rational, bool)>> = vec![Vec::new(); graph.num_edges()];
        for p in extra {
            if let PointOnGraph::Interior { edge, offset } = p {
                cuts[*edge].push((offset.clone(), true));
            }
        }
        for p in divisor.support() {
            if let PointOnGraph::Interior { edge, offset } = p {
                cuts[*edge].push((offset.clone(), false));
            }
        }
        for (e, edge) in graph.edges().iter().enumerate() {
            if edge.is_loop() {
                cuts[e].push((&edge.length / rat(2), false));
            }
            let list = &mut cuts[e];
            list.sort();
            let mut chain = vec![(Rational::zero(), edge.ends[0])];
            for (off, protect) in list.iter() {
                let p = PointOnGraph::Interior {
                    edge: e,
                    offset: off.clone(),
                };
                let v = match wg.index.get(&p) {
                    Some(&v) => {
                        wg.vertices[v].protected |= *protect;
                        v
                    }
                    None => wg.push_vertex(p, *protect),
                };
                if chain.last().map(|c| c.1) != Some(v) {
                    chain.push((off.clone(), v));
                }
            }
            chain.push((edge.length.clone(), edge.ends[1]));
            for w in chain.windows(2) {
                wg.push_edge([w[0].1, w[1].1], e, [w[0].0.clone(), w[1].0.clone()]);
            }
        }
        for (p, c) in divisor.terms() {
            let v = wg.index[p];
            wg.vertices[v].chips = c;
        }
        for p in extra {
            let v = wg.index[p];
            wg.vertices[v].protected = true;
        }
        wg
    }

    fn push_vertex(&mut self, pos: PointOnGraph, protected: bool) -> usize {
        let id = self.vertices.len();
        self.index.insert(pos.clone(), id);
        self.vertices.push(WVertex {
            pos,
            chips: 0,
            f: Rational::zero(),
            alive: true,
            protected,
        });
        self.adj.push(Vec::new());
        id
    }

    fn push_edge(&mut self, ends: [usize; 2], orig: usize, offs: [Rational; 2]) -> usize {
        let id = self.edges.len();
        self.edges.push(WEdge {
            ends,
            orig,
            offs,
            alive: true,
        });
        self.adj[ends[0]].push(id);
        self.adj[ends[1]].push(id);
        id
    }

    fn kill_edge(&mut self, e: usize) {
        self.edges[e].alive = false;
        for v in self.edges[e].ends {
            self.adj[v].retain(|&x| x != e);
        }
    }

    pub fn vertex_at(&self, p: &PointOnGraph) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn alive_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(|&v| self.vertices[v].alive)
    }

    /// Splits edge `e` at distance `s` from its end `from`, returning the
    /// new vertex. The accumulated function is interpolated.
    pub fn split(&mut self, e: usize, from: usize, s: &Rational) -> usize {
        let edge = self.edges[e].clone();
        let len = edge.length();
        debug_assert!(s.is_positive() && *s < len);
        let dir = if edge.offs[1] > edge.offs[0] { rat(1) } else { rat(-1) };
        let (near, far) = if edge.ends[0] == from { (0, 1) } else { (1, 0) };
        let offset = &edge.offs[near] + if near == 0 { &dir * s } else { -(&dir * s) };
        let pos = self
            .graph
            .point(edge.orig, offset.clone())
            .expect("split point lies on the edge");
        let fa = &self.vertices[edge.ends[near]].f;
        let fb = &self.vertices[edge.ends[far]].f;
        let fv = fa + (fb - fa) * s / &len;
        let v = self.push_vertex(pos, false);
        self.vertices[v].f = fv;
        self.kill_edge(e);
        self.push_edge(
            [edge.ends[near], v],
            edge.orig,
            [edge.offs[near].clone(), offset.clone()],
        );
        self.push_edge([v, edge.ends[far]], edge.orig, [offset, edge.offs[far].clone()]);
        v
    }

    /// Smooths away unprotected chipless degree-two vertices through which
    /// the accumulated function is linear.
    pub fn merge_trivial(&mut self) {
        let mut changed = true;
        while changed {
            changed = false;
            for v in 0..self.vertices.len() {
                let vx = &self.vertices[v];
                if !vx.alive || vx.protected || vx.chips != 0 || self.adj[v].len() != 2 {
                    continue;
                }
                let (e1, e2) = (self.adj[v][0], self.adj[v][1]);
                let (a, b) = (self.edges[e1].other(v), self.edges[e2].other(v));
                if a == b {
                    continue;
                }
                let (l1, l2) = (self.edges[e1].length(), self.edges[e2].length());
                let fv = &self.vertices[v].f;
                let s1 = (fv - &self.vertices[a].f) / &l1;
                let s2 = (&self.vertices[b].f - fv) / &l2;
                if s1 != s2 {
                    continue;
                }
                let orig = self.edges[e1].orig;
                let (oa, ob) = (
                    self.edges[e1].offset_at(a).clone(),
                    self.edges[e2].offset_at(b).clone(),
                );
                self.kill_edge(e1);
                self.kill_edge(e2);
                self.vertices[v].alive = false;
                let pos = self.vertices[v].pos.clone();
                self.index.remove(&pos);
                self.push_edge([a, b], orig, [oa, ob]);
                changed = true;
            }
        }
    }

    /// Shortest-path distances from `source` (unreachable never happens on a connected model).
    pub fn distances(&self, source: usize) -> Vec<Rational> {
        let mut dist: Vec<Option<Rational>> = vec![None; self.vertices.len()];
        let mut heap = BinaryHeap::new();
        dist[source] = Some(Rational::zero());
        heap.push(Reverse((Rational::zero(), source)));
        while let Some(Reverse((d, v))) = heap.pop() {
            if dist[v].as_ref().is_some_and(|best| *best < d) {
                continue;
            }
            for &e in &self.adj[v] {
                let w = self.edges[e].other(v);
                let nd = &d + self.edges[e].length();
                if dist[w].as_ref().is_none_or(|cur| nd < *cur) {
                    dist[w] = Some(nd.clone());
                    heap.push(Reverse((nd, w)));
                }
            }
        }
        dist.into_iter()
            .map(|d| d.unwrap_or_else(Rational::zero))
            .collect()
    }

    /// Metric Dhar burning from `source`; returns the unburnt mask and the
    /// chip-holding vertices that burnt (in burning order).
    pub fn burn(&self, source: usize) -> (Vec<bool>, Vec<usize>) {
        let n = self.vertices.len();
        let mut unburnt: Vec<bool> = (0..n).map(|v| self.vertices[v].alive).collect();
        let mut hits = vec![0i64; n];
        let mut witnesses = Vec::new();
        unburnt[source] = false;
        let mut stack = vec![source];
        while let Some(v) = stack.pop() {
            for &e in &self.adj[v] {
                let w = self.edges[e].other(v);
                if !unburnt[w] {
                    continue;
                }
                hits[w] += 1;
                if hits[w] > self.vertices[w].chips {
                    unburnt[w] = false;
                    if self.vertices[w].chips > 0 {
                        witnesses.push(w);
                    }
                    stack.push(w);
                }
            }
        }
        (unburnt, witnesses)
    }

    /// Adds `h` (given by vertex values, linear on every edge) to the
    /// accumulated function and `div(h)` to the chips.
    pub fn apply(&mut self, h: &[Rational]) {
        let mut delta = vec![Rational::zero(); self.vertices.len()];
        for edge in self.edges.iter().filter(|e| e.alive) {
            let [a, b] = edge.ends;
            let s = (&h[b] - &h[a]) / edge.length();
            delta[a] += &s;
            delta[b] -= &s;
        }
        for (v, d) in delta.into_iter().enumerate() {
            if !self.vertices[v].alive {
                continue;
            }
            self.vertices[v].chips += as_i64(&d).expect("integral slopes give integral orders");
            self.vertices[v].f += &h[v];
        }
    }

    pub fn divisor(&self) -> Divisor {
        Divisor::from_terms(
            self.alive_vertices()
                .map(|v| (self.vertices[v].pos.clone(), self.vertices[v].chips)),
        )
    }

    /// The accumulated function on the original model.
    pub fn function(&self) -> PLFunction {
        let g = self.graph;
        let mut pieces: Vec<Vec<(Rational, Rational)>> = vec![Vec::new(); g.num_edges()];
        for edge in self.edges.iter().filter(|e| e.alive) {
            for i in 0..2 {
                pieces[edge.orig].push((edge.offs[i].clone(), self.vertices[edge.ends[i]].f.clone()));
            }
        }
        for list in &mut pieces {
            list.sort();
            list.dedup();
        }
        let vertex_values = (0..g.num_vertices()).map(|v| self.vertices[v].f.clone()).collect();
        PLFunction::new(g, vertex_values, pieces).expect("accumulated function is well formed")
    }
}
