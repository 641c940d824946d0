//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use common::*;
use rand::Rng;
use serde_json::Value;
use tropicurve::corpus;
use tropicurve::io::{graph_to_json, parse_graph};
use tropicurve::plfunction::{in_rd, witnesses};
use tropicurve::rank::{has_nonneg_rank, rank, riemann_roch};
use tropicurve::rational::{frac, rat};
use tropicurve::redmap::{dual_eval, normalized_witness, one_skeleton_check, red, trace_all};
use tropicurve::reduction::{oracle_reduce, reduce};
use tropicurve::special::*;
use tropicurve::{Divisor, MetricGraph, PointOnGraph, Rational};

fn fixed_corpus() -> Vec<(&'static str, MetricGraph)> {
    vec![
        ("segment", corpus::segment(rat(2)).unwrap()),
        ("circle", corpus::circle(frac(5, 2)).unwrap()),
        ("theta", corpus::theta([rat(1), rat(2), rat(3)]).unwrap()),
        ("banana3", corpus::banana(3, &[rat(1), frac(3, 2), rat(2), frac(1, 2)]).unwrap()),
        ("c2", corpus::c2(3, &[rat(1), rat(2)], frac(3, 4), rat(2)).unwrap()),
        ("c3", corpus::c3(3, &[rat(1), rat(2)], frac(1, 2), rat(1), rat(2)).unwrap()),
    ]
}

fn wider_corpus() -> Vec<(&'static str, MetricGraph)> {
    let mut out = fixed_corpus();
    out.push(("c2p", corpus::c2_prime(3, &[rat(1), rat(2)], frac(1, 2), [rat(1), frac(3, 2)]).unwrap()));
    out.push(("k4", corpus::k4().unwrap()));
    out
}

/// Random divisor of the given degree supported on points with small denominators.
fn divisor_of_degree(rng: &mut rand_chacha::ChaCha8Rng, g: &MetricGraph, degree: i64) -> Divisor {
    let mut d = random_divisor(rng, g, 3, 2, 4);
    let p = random_point(rng, g, 4);
    d.add(p, degree - d.degree());
    d
}

fn criterion_1() {
    let mut rng = rng(101);
    let mut checked = 0;
    while checked < 220 {
        let g = random_graph(&mut rng, 8, 4, 4);
        let d = random_divisor(&mut rng, &g, 6, 3, 4);
        let base = random_point(&mut rng, &g, 4);
        let r = reduce(&g, &d, &base).unwrap();
        assert_eq!(r.divisor, oracle_reduce(&g, &d, &base).unwrap(), "{g} D = {}", d.display(&g));
        assert!(witnesses(&g, &r.divisor, &d, &r.witness));
        let again = reduce(&g, &r.divisor, &base).unwrap();
        assert_eq!(again.divisor, r.divisor);
        assert!(again.witness.is_constant());
        checked += 1;
    }
}

fn criterion_2() {
    let mut rng = rng(202);
    for _ in 0..50 {
        let g = random_graph(&mut rng, 6, 3, 4);
        let d = random_divisor(&mut rng, &g, 5, 3, 4);
        let f = random_function(&mut rng, &g, 4);
        let moved = d.plus(&f.principal_divisor(&g));
        let base = random_point(&mut rng, &g, 4);
        assert_eq!(reduce(&g, &d, &base).unwrap().divisor, reduce(&g, &moved, &base).unwrap().divisor);
    }
}

fn criterion_3() {
    let mut rng = rng(303);
    let curves = fixed_corpus();
    for i in 0..100 {
        let (name, g) = &curves[i % curves.len()];
        let genus = g.genus() as i64;
        let degree = rng.gen_range(-2..=2 * genus + 2);
        let d = divisor_of_degree(&mut rng, g, degree);
        let rr = riemann_roch(g, &d).unwrap();
        assert!(rr.holds(), "{name}: {} gives {rr:?}", d.display(g));
    }
}

fn criterion_4() {
    let theta = corpus::theta([rat(1), rat(2), rat(3)]).unwrap();
    let d = Divisor::parse("2*(P) + 1*(Q)", &theta).unwrap();
    assert_eq!(rank(&theta, &d).unwrap().rank, 1);
    for (name, g) in wider_corpus() {
        let genus = g.genus() as i64;
        assert_eq!(rank(&g, &Divisor::zero()).unwrap().rank, 0, "{name}");
        assert_eq!(rank(&g, &g.canonical_divisor()).unwrap().rank, genus - 1, "{name}");
    }
    let mut rng = rng(404);
    let mut trees = 0;
    while trees < 10 {
        let g = random_graph(&mut rng, 5, 0, 3);
        for deg in 0..=3 {
            let d = random_effective(&mut rng, &g, deg, 3);
            assert_eq!(rank(&g, &d).unwrap().rank, deg, "{g} {}", d.display(&g));
        }
        trees += 1;
    }
}

fn criterion_5() {
    let mut rng = rng(505);
    for (name, g) in wider_corpus() {
        let genus = g.genus() as i64;
        let mut divisors = Vec::new();
        if has_nonneg_rank(&g, &g.canonical_divisor()).unwrap() {
            divisors.push(g.canonical_divisor());
        }
        while divisors.len() < 3 {
            let degree = rng.gen_range(0..=2 * genus + 2);
            let d = divisor_of_degree(&mut rng, &g, degree);
            if has_nonneg_rank(&g, &d).unwrap() {
                divisors.push(d);
            }
        }
        for d in &divisors {
            let traces = trace_all(&g, d).unwrap();
            for tr in &traces {
                assert!(tr.is_continuous(&g), "{name}: {}", d.display(&g));
                for s in &tr.segments {
                    for k in 0..=6 {
                        let t = &s.t0 + (&s.t1 - &s.t0) * frac(k, 6);
                        let got = s.assemble(&g, &t);
                        assert_eq!(got.degree(), d.degree());
                        if (1..=5).contains(&k) {
                            let p = s.base_point(&g, &t);
                            assert_eq!(got, reduce(&g, d, &p).unwrap().divisor, "{name}: {}", d.display(&g));
                        }
                    }
                }
            }
            assert!(one_skeleton_check(&g, &traces), "{name}: {}", d.display(&g));
        }
    }
}

fn criterion_6() {
    for (name, g) in wider_corpus() {
        if g.genus() < 2 {
            continue;
        }
        let locus = weierstrass_locus(&g).unwrap();
        assert!(!locus.is_empty(), "{name}");
        let w = descent_weierstrass(&g).unwrap();
        assert!(locus.contains(&w), "{name}");
        assert!(weierstrass_test(&g, &w).unwrap());
    }
    let unit = corpus::banana(3, &[rat(1)]).unwrap();
    let locus = weierstrass_locus(&unit).unwrap();
    for e in 0..unit.num_edges() {
        assert!(locus.intervals[e].iter().any(|(a, b)| a < b), "edge {e}");
    }
}

fn criterion_7() {
    for genus in [2, 3] {
        let g = corpus::banana(genus, &[rat(1), rat(2), rat(3), rat(4)]).unwrap();
        let d = Divisor::parse(&format!("{genus}*(P) + {genus}*(Q)"), &g).unwrap();
        let v = very_ample_exact(&g, &d).unwrap();
        assert!(!v.very_ample);
        let (p, q) = v.witness.unwrap();
        let pair = [PointOnGraph::Vertex(0), PointOnGraph::Vertex(1)];
        assert!((p == pair[0] && q == pair[1]) || (p == pair[1] && q == pair[0]), "{p:?} {q:?}");
        assert!(!is_very_ample(&g, &d).unwrap().very_ample);
    }
    let mut rng = rng(707);
    for (name, g) in wider_corpus() {
        let genus = g.genus() as i64;
        for _ in 0..2 {
            let d = random_effective(&mut rng, &g, 2 * genus + 1, 3);
            let v = very_ample_exact(&g, &d).unwrap();
            assert!(v.very_ample, "{name}: {} collides at {:?}", d.display(&g), v.witness);
        }
        if genus >= 2 {
            let k = g.canonical_divisor();
            let mut sampled = 0;
            while sampled < 50 {
                let p = random_point(&mut rng, &g, 6);
                let a = red(&g, &k, &p).unwrap().coefficient(&p);
                assert!(a >= genus - 1, "{name} at {}", g.point_name(&p));
                sampled += 1;
            }
        }
    }
}

fn with_length(g: &MetricGraph, edge: &str, delta: Rational) -> MetricGraph {
    let mut v = graph_to_json(g);
    for e in v["edges"].as_array_mut().unwrap() {
        if e["id"] == edge {
            let len = tropicurve::rational::parse_rational(e["length"].as_str().unwrap()).unwrap();
            e["length"] = Value::String(tropicurve::rational::format_rational(&(len + &delta)));
        }
    }
    parse_graph(&v.to_string()).unwrap()
}

fn criterion_8() {
    let mut rng = rng(808);
    let len = |rng: &mut rand_chacha::ChaCha8Rng| frac(rng.gen_range(1..=12), rng.gen_range(1..=4));
    for genus in [2, 3, 4] {
        for _ in 0..2 {
            let bundle: Vec<Rational> = (0..genus).map(|_| len(&mut rng)).collect();
            let mut fixtures = vec![
                (corpus::banana(genus, &bundle).unwrap(), CanonicalCase::CI),
                (corpus::c2(genus, &bundle, len(&mut rng), len(&mut rng)).unwrap(), CanonicalCase::CII),
                (corpus::c3(genus, &bundle, len(&mut rng), len(&mut rng), len(&mut rng)).unwrap(), CanonicalCase::CIII),
            ];
            if genus >= 3 {
                fixtures.push((
                    corpus::c2_prime(genus, &bundle, len(&mut rng), [len(&mut rng), len(&mut rng)]).unwrap(),
                    CanonicalCase::CIIPrime,
                ));
            }
            for (g, expected) in fixtures {
                let class = canonical_classification(&g).unwrap();
                assert_eq!(class.case, expected, "genus {genus}: {g}");
                let k = g.canonical_divisor();
                assert!(!very_ample_exact(&g, &k).unwrap().very_ample);
                let (p, q) = class.witness.unwrap();
                let expected = Divisor::from_terms([(p.clone(), genus as i64 - 1), (q.clone(), genus as i64 - 1)]);
                assert_eq!(red(&g, &k, &p).unwrap(), expected);
                assert_eq!(red(&g, &k, &q).unwrap(), expected);
                let pq = Divisor::from_terms([(p, 1), (q, 1)]);
                assert_eq!(rank(&g, &pq).unwrap().rank, 1);
            }
        }
    }
    for genus in [3, 4] {
        let g = corpus::c2(genus, &[rat(1), rat(2), rat(3)], rat(1), rat(2)).unwrap();
        let bent = with_length(&g, "pr", frac(1, 7));
        let class = canonical_classification(&bent).unwrap();
        assert_eq!(class.case, CanonicalCase::VeryAmple, "genus {genus}");
        assert!(very_ample_exact(&bent, &bent.canonical_divisor()).unwrap().very_ample);
    }
    for (name, g) in wider_corpus() {
        if g.genus() >= 2 {
            let class = canonical_classification(&g).unwrap();
            let exact = very_ample_exact(&g, &g.canonical_divisor()).unwrap().very_ample;
            assert_eq!(class.case == CanonicalCase::VeryAmple, exact, "{name}");
        }
    }
}

fn criterion_9() {
    let mut rng = rng(909);
    let curves = wider_corpus();
    let mut pairs = 0;
    while pairs < 50 {
        let (_, g) = &curves[pairs % curves.len()];
        let genus = g.genus() as i64;
        let deg = rng.gen_range(1..=genus + 2);
        let d = random_effective(&mut rng, g, deg, 3);
        let p = random_point(&mut rng, g, 4);
        let q = random_point(&mut rng, g, 4);
        let r = random_point(&mut rng, g, 4);
        let (dp, fp) = normalized_witness(g, &d, &p).unwrap();
        let (_, fq) = normalized_witness(g, &d, &q).unwrap();
        let (_, fr) = normalized_witness(g, &d, &r).unwrap();
        let c = frac(rng.gen_range(-8..=8), rng.gen_range(1..=4));

        // closure of R(D) under max and constants
        let sum = fq.scalar_mul(&c).tropical_add(&fr).unwrap();
        assert!(in_rd(g, &d, &fq) && in_rd(g, &d, &fr));
        assert!(in_rd(g, &d, &sum));

        // functions in R(D_P) peak at P
        for f in [fq.minus(&fp).unwrap(), sum.minus(&fp).unwrap()] {
            assert!(in_rd(g, &dp, &f));
            assert_eq!(f.max_value(), f.evaluate(&p));
        }

        // f_P dominates every h in R(D) vanishing at P
        for h in [fq.clone(), fr.clone(), sum.clone()] {
            let h = h.scalar_mul(&-h.evaluate(&p));
            assert!(fp.minus(&h).unwrap().min_value() >= rat(0));
        }
        pairs += 1;
    }
}

fn criterion_10() {
    let mut rng = rng(1010);
    let curves = wider_corpus();
    let mut pairs = 0;
    let mut linear_pieces = 0;
    while pairs < 50 {
        let (_, g) = &curves[pairs % curves.len()];
        let genus = g.genus() as i64;
        let deg = rng.gen_range(1..=genus + 2);
        let d = random_effective(&mut rng, g, deg, 3);
        let e = rng.gen_range(0..g.num_edges());
        let tr = tropicurve::redmap::trace_edge(g, &d, e).unwrap();
        let s = &tr.segments[rng.gen_range(0..tr.segments.len())];
        let q = random_point(&mut rng, g, 4);
        let n: usize = 8;
        let ts: Vec<Rational> = (0..=2 * n as i64).map(|k| &s.t0 + (&s.t1 - &s.t0) * frac(k, 2 * n as i64)).collect();
        let vals: Vec<Rational> = ts
            .iter()
            .map(|t| dual_eval(g, &d, &q, &s.base_point(g, t)).unwrap())
            .collect();
        for k in 0..n {
            let (a, m, b) = (2 * k, 2 * k + 1, 2 * k + 2);
            let left = (&vals[m] - &vals[a]) / (&ts[m] - &ts[a]);
            let right = (&vals[b] - &vals[m]) / (&ts[b] - &ts[m]);
            if left == right {
                assert!(left.is_integer(), "slope {left}");
                linear_pieces += 1;
            }
        }
        pairs += 1;
    }
    assert!(linear_pieces >= 50, "only {linear_pieces} linear pieces sampled");
}

fn main() -> ExitCode {
    let criteria: [(&str, fn()); 10] = [
        ("reduction agrees with the subdivision oracle, is idempotent, witnesses verify", criterion_1),
        ("reduced divisor is unchanged by adding principal divisors", criterion_2),
        ("Riemann-Roch identity on the six-curve corpus", criterion_3),
        ("known ranks: theta, r(K) = g - 1, genus zero", criterion_4),
        ("traces continuous, degree-preserving, pointwise correct, one-skeleton", criterion_5),
        ("Weierstrass loci nonempty, banana intervals, descent lands in the locus", criterion_6),
        ("very ampleness: banana collisions, degree 2g + 1, canonical lower bound", criterion_7),
        ("canonical classification of the four families", criterion_8),
        ("tropical module: closure, peak at base, domination", criterion_9),
        ("dual functions have integral slopes", criterion_10),
    ];
    std::panic::set_hook(Box::new(|info| eprintln!("    {info}")));
    let mut failed = 0;
    for (i, (label, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let ok = catch_unwind(AssertUnwindSafe(run)).is_ok();
        let secs = start.elapsed().as_secs_f64();
        println!("criterion {:>2}: {} ({secs:.1}s) {label}", i + 1, if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

