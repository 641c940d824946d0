mod common;

use common::*;
use tropicurve::rational::frac;
use tropicurve::redmap::{one_skeleton_check, trace_edge};
use tropicurve::reduction::oracle_reduce;

#[test]
fn random_traces_agree_with_oracle() {
    let mut rng = rng(11);
    for round in 0..80 {
        let g = random_graph(&mut rng, 5, 3, 3);
        if g.num_edges() == 0 {
            continue;
        }
        let deg = (round % 5) as i64 + 1;
        let d = random_effective(&mut rng, &g, deg, 3);
        let mut traces = Vec::new();
        for e in 0..g.num_edges() {
            let tr = trace_edge(&g, &d, e).unwrap();
            assert!(tr.is_continuous(&g), "{g} D={} edge {e}", d.display(&g));
            for s in &tr.segments {
                assert!(s.t0 < s.t1);
                if !s.is_constant() {
                    assert!(s.excess >= 1);
                }
                for k in 0..=4 {
                    let t = &s.t0 + (&s.t1 - &s.t0) * frac(k, 4);
                    let got = s.assemble(&g, &t);
                    assert_eq!(got.degree(), d.degree());
                    let want = oracle_reduce(&g, &d, &s.base_point(&g, &t)).unwrap();
                    assert_eq!(got, want, "{g} D={} edge {e} t={t}", d.display(&g));
                }
            }
            traces.push(tr);
        }
        assert!(one_skeleton_check(&g, &traces));
    }
}
