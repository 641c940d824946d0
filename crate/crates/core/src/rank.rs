//! Rank of divisors through a rank-determining set, Riemann–Roch, and the
//! sufficient criterion for rank-determining sets.

use std::collections::HashMap;

use crate::divisor::Divisor;
use crate::error::Result;
use crate::graph::{MetricGraph, PointOnGraph};
use crate::reduction::reduce;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankResult {
    pub rank: i64,
    /// Effective divisor of degree `rank + 1` with `|D - E|` empty.
    pub certificate: Divisor,
}

/// `|D|` is nonempty.
pub fn has_nonneg_rank(graph: &MetricGraph, d: &Divisor) -> Result<bool> {
    if d.degree() < 0 {
        return Ok(false);
    }
    let base = PointOnGraph::Vertex(0);
    Ok(reduce(graph, d, &base)?.divisor.coefficient(&base) >= 0)
}

/// Vertices of the loopless model, as points of the curve.
pub fn default_rank_set(graph: &MetricGraph) -> Vec<PointOnGraph> {
    let mut out: Vec<PointOnGraph> = (0..graph.num_vertices()).map(PointOnGraph::Vertex).collect();
    for (i, e) in graph.edges().iter().enumerate() {
        if e.is_loop() {
            out.push(PointOnGraph::Interior {
                edge: i,
                offset: &e.length / crate::rational::rat(2),
            });
        }
    }
    out
}

pub fn rank(graph: &MetricGraph, d: &Divisor) -> Result<RankResult> {
    rank_over(graph, d, &default_rank_set(graph))
}

/// Rank computed by subtracting points of `set`; equals the true rank when
/// `set` is rank-determining. Uses `r(D) = 1 + min_a r(D - (a))` for `|D| ≠ ∅`,
/// memoized on reduced representatives.
pub fn rank_over(graph: &MetricGraph, d: &Divisor, set: &[PointOnGraph]) -> Result<RankResult> {
    d.check_on(graph)?;
    for p in set {
        graph.check_point(p)?;
    }
    let mut memo = HashMap::new();
    let (rank, certificate) = rank_rec(graph, d, set, &mut memo)?;
    Ok(RankResult { rank, certificate })
}

fn rank_rec(
    graph: &MetricGraph,
    d: &Divisor,
    set: &[PointOnGraph],
    memo: &mut HashMap<Divisor, (i64, Divisor)>,
) -> Result<(i64, Divisor)> {
    let base = PointOnGraph::Vertex(0);
    if d.degree() < 0 {
        return Ok((-1, Divisor::zero()));
    }
    let key = reduce(graph, d, &base)?.divisor;
    if let Some(hit) = memo.get(&key) {
        return Ok(hit.clone());
    }
    let result = if key.coefficient(&base) < 0 {
        (-1, Divisor::zero())
    } else {
        let mut best: Option<(i64, Divisor)> = None;
        for a in set {
            let (r, mut cert) = rank_rec(graph, &key.minus(&Divisor::point(a.clone(), 1)), set, memo)?;
            if best.as_ref().is_none_or(|(b, _)| r < *b) {
                cert.add(a.clone(), 1);
                best = Some((r, cert));
                if r == -1 {
                    break;
                }
            }
        }
        let (r, cert) = best.expect("rank set is nonempty");
        (r + 1, cert)
    };
    memo.insert(key, result.clone());
    Ok(result)
}

/// Rank by plain enumeration: the largest `k` such that `D - E` has nonempty
/// linear system for every effective `E` of degree `k` supported on `set`.
pub fn rank_by_enumeration(graph: &MetricGraph, d: &Divisor, set: &[PointOnGraph]) -> Result<RankResult> {
    if !has_nonneg_rank(graph, d)? {
        return Ok(RankResult {
            rank: -1,
            certificate: Divisor::zero(),
        });
    }
    let mut k = 1;
    loop {
        let mut counts = vec![0i64; set.len()];
        let mut failing = None;
        for_each_multiset(set.len(), k, &mut counts, 0, &mut |c: &[i64]| {
            let e = Divisor::from_terms(set.iter().cloned().zip(c.iter().copied()));
            match has_nonneg_rank(graph, &d.minus(&e)) {
                Ok(true) => true,
                _ => {
                    failing = Some(e);
                    false
                }
            }
        });
        if let Some(certificate) = failing {
            return Ok(RankResult {
                rank: k as i64 - 1,
                certificate,
            });
        }
        k += 1;
    }
}

/// Visits the multisets of size `k` in lexicographic order until `visit` returns false.
fn for_each_multiset(
    n: usize,
    k: usize,
    counts: &mut [i64],
    from: usize,
    visit: &mut dyn FnMut(&[i64]) -> bool,
) -> bool {
    if k == 0 {
        return visit(counts);
    }
    for i in from..n {
        counts[i] += 1;
        let go_on = for_each_multiset(n, k - 1, counts, i, visit);
        counts[i] -= 1;
        if !go_on {
            return false;
        }
    }
    true
}

/// Both sides of Riemann–Roch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RiemannRoch {
    pub rank: i64,
    pub dual_rank: i64,
    pub degree: i64,
    pub genus: i64,
}

impl RiemannRoch {
    pub fn holds(&self) -> bool {
        self.rank - self.dual_rank == self.degree + 1 - self.genus
    }
}

pub fn riemann_roch(graph: &MetricGraph, d: &Divisor) -> Result<RiemannRoch> {
    let k = graph.canonical_divisor();
    Ok(RiemannRoch {
        rank: rank(graph, d)?.rank,
        dual_rank: rank(graph, &k.minus(d))?.rank,
        degree: d.degree(),
        genus: graph.genus() as i64,
    })
}

/// `r(D) - r(K - D) = deg(D) + 1 - g`.
pub fn riemann_roch_check(graph: &MetricGraph, d: &Divisor) -> Result<bool> {
    Ok(riemann_roch(graph, d)?.holds())
}

/// Sufficient test: cutting the curve along `set` gives at least two
/// pieces, all of genus zero.
pub fn is_rank_determining(graph: &MetricGraph, set: &[PointOnGraph]) -> Result<bool> {
    for p in set {
        graph.check_point(p)?;
    }
    let refined = graph.refine(set);
    let g = &refined.graph;
    let cut: Vec<bool> = {
        let mut c = vec![false; g.num_vertices()];
        for p in set {
            c[refined.vertex_of(p)] = true;
        }
        c
    };
    // union edges through uncut vertices
    let m = g.num_edges();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut first_edge: Vec<Option<usize>> = vec![None; g.num_vertices()];
    for (i, e) in g.edges().iter().enumerate() {
        for v in e.ends {
            if cut[v] {
                continue;
            }
            match first_edge[v] {
                Some(j) => {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
                None => first_edge[v] = Some(i),
            }
        }
    }
    let mut pieces: HashMap<usize, (usize, std::collections::BTreeSet<usize>)> = HashMap::new();
    for (i, e) in g.edges().iter().enumerate() {
        let root = find(&mut parent, i);
        let entry = pieces.entry(root).or_default();
        entry.0 += 1;
        entry.1.extend(e.ends);
    }
    let isolated = (0..g.num_vertices())
        .filter(|&v| !cut[v] && first_edge[v].is_none())
        .count();
    let count = pieces.len() + isolated;
    Ok(count >= 2 && pieces.values().all(|(edges, verts)| *edges + 1 == verts.len()))
}
