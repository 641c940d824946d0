mod common;

use tropicurve::corpus;
use tropicurve::rational::{frac, rat};
use tropicurve::redmap::red;
use tropicurve::special::*;
use tropicurve::{Divisor, Error, PointOnGraph};

#[test]
fn families_classify_as_themselves() {
    for g in 3..=5 {
        let lengths = [rat(1), frac(3, 2), rat(2), frac(5, 7)];
        let cases = [
            (corpus::banana(g, &lengths).unwrap(), CanonicalCase::CI),
            (corpus::c2(g, &lengths, frac(2, 3), rat(3)).unwrap(), CanonicalCase::CII),
            (
                corpus::c2_prime(g, &lengths, frac(1, 2), [rat(1), frac(4, 3)]).unwrap(),
                CanonicalCase::CIIPrime,
            ),
            (corpus::c3(g, &lengths, frac(3, 4), rat(2), frac(1, 3)).unwrap(), CanonicalCase::CIII),
        ];
        for (graph, expected) in cases {
            let class = canonical_classification(&graph).unwrap();
            assert_eq!(class.case, expected, "g = {g}");
            assert!(class.witness.is_some());
        }
    }
}

#[test]
fn unequal_arms_are_very_ample() {
    let lengths = [rat(1), rat(2)];
    let c2 = corpus::c2(3, &lengths, rat(1), rat(1)).unwrap();
    assert_eq!(canonical_classification(&c2).unwrap().case, CanonicalCase::CII);
    let class = canonical_classification(&c2_prime_unequal()).unwrap();
    assert_eq!(class.case, CanonicalCase::VeryAmple);
    assert!(class.witness.is_none());
}

fn c2_prime_unequal() -> tropicurve::MetricGraph {
    tropicurve::MetricGraph::from_spec(
        &["P", "Q", "R", "S"],
        &[
            ("e1", "P", "Q", rat(1)),
            ("e2", "P", "Q", rat(2)),
            ("pr", "P", "R", rat(1)),
            ("qs", "Q", "S", rat(2)),
            ("rs1", "R", "S", rat(1)),
            ("rs2", "R", "S", rat(3)),
        ],
    )
    .unwrap()
}

#[test]
fn k4_canonical_is_very_ample() {
    let g = corpus::k4().unwrap();
    let class = canonical_classification(&g).unwrap();
    assert_eq!(class.case, CanonicalCase::VeryAmple);
    assert!(is_very_ample(&g, &g.canonical_divisor()).unwrap().very_ample);
    assert!(very_ample_exact(&g, &g.canonical_divisor()).unwrap().very_ample);
}

#[test]
fn genus_two_is_never_very_ample() {
    let curves = [
        corpus::theta([rat(1), rat(2), rat(3)]).unwrap(),
        corpus::c2(2, &[rat(1)], rat(1), rat(2)).unwrap(),
        corpus::c3(2, &[rat(1)], rat(1), rat(2), rat(3)).unwrap(),
    ];
    for g in &curves {
        let class = canonical_classification(g).unwrap();
        assert_ne!(class.case, CanonicalCase::VeryAmple);
        let (p, q) = class.witness.unwrap();
        assert_ne!(p, q);
        let k = g.canonical_divisor();
        assert_eq!(red(g, &k, &p).unwrap(), red(g, &k, &q).unwrap());
    }
}

#[test]
fn classification_preconditions() {
    let c = corpus::circle(rat(1)).unwrap();
    assert!(matches!(canonical_classification(&c), Err(Error::GenusTooSmall(1))));
    let leafy = tropicurve::MetricGraph::from_spec(
        &["P", "Q", "L"],
        &[
            ("e1", "P", "Q", rat(1)),
            ("e2", "P", "Q", rat(1)),
            ("e3", "P", "Q", rat(1)),
            ("leaf", "Q", "L", rat(1)),
        ],
    )
    .unwrap();
    assert!(matches!(canonical_classification(&leafy), Err(Error::HasLeaves(_))));
}

#[test]
fn very_ample_on_small_curves() {
    let c = corpus::circle(rat(3)).unwrap();
    let o = PointOnGraph::Vertex(0);
    for deg in 0..=4 {
        let d = Divisor::point(o.clone(), deg);
        let v = very_ample_exact(&c, &d).unwrap();
        assert_eq!(v.very_ample, deg >= 3, "degree {deg}");
        if let Some((p, q)) = v.witness {
            assert_ne!(p, q);
            assert_eq!(red(&c, &d, &p).unwrap(), red(&c, &d, &q).unwrap());
        }
        assert_eq!(is_very_ample(&c, &d).unwrap().very_ample, deg >= 3);
    }
    let theta = corpus::theta([rat(1), rat(1), rat(1)]).unwrap();
    let d = Divisor::parse("2*(P) + 2*(Q)", &theta).unwrap();
    assert!(!is_very_ample(&theta, &d).unwrap().very_ample);
    let d = Divisor::parse("3*(P) + 2*(Q)", &theta).unwrap();
    assert!(is_very_ample(&theta, &d).unwrap().very_ample);
    assert!(very_ample_exact(&theta, &d).unwrap().very_ample);
    assert!(matches!(
        is_very_ample(&theta, &Divisor::parse("-(P)", &theta).unwrap()),
        Err(Error::EmptyLinearSystem)
    ));
}

#[test]
fn weierstrass_on_banana() {
    let g = corpus::banana(3, &[rat(1), rat(2), rat(3), rat(4)]).unwrap();
    let locus = weierstrass_locus(&g).unwrap();
    assert!(!locus.is_empty());
    // K reduced at a branch vertex is 2(P) + 2(Q)
    assert!(!weierstrass_test(&g, &PointOnGraph::Vertex(0)).unwrap());
    assert!(!locus.contains(&PointOnGraph::Vertex(0)));
    let w = descent_weierstrass(&g).unwrap();
    assert!(weierstrass_test(&g, &w).unwrap());
    assert!(locus.contains(&w));
}

#[test]
fn weierstrass_locus_agrees_with_pointwise_test() {
    for name in ["theta", "banana", "c2", "c2p", "c3", "k4"] {
        let g = corpus::by_name(name, 3).unwrap();
        let locus = weierstrass_locus(&g).unwrap();
        assert!(!locus.is_empty(), "{name}");
        for e in 0..g.num_edges() {
            let len = &g.edge(e).length;
            for k in 0..=8 {
                let p = g.point(e, len * frac(k, 8)).unwrap();
                assert_eq!(locus.contains(&p), weierstrass_test(&g, &p).unwrap(), "{name} {}", g.point_name(&p));
            }
        }
        let w = descent_weierstrass(&g).unwrap();
        assert!(weierstrass_test(&g, &w).unwrap(), "{name}");
    }
}

#[test]
fn weierstrass_needs_genus_two() {
    let c = corpus::circle(rat(1)).unwrap();
    assert!(matches!(weierstrass_locus(&c), Err(Error::GenusTooSmall(1))));
    assert!(matches!(
        weierstrass_test(&c, &PointOnGraph::Vertex(0)),
        Err(Error::GenusTooSmall(1))
    ));
}

#[test]
fn d_weierstrass_on_circle() {
    let c = corpus::circle(rat(4)).unwrap();
    let d = Divisor::point(PointOnGraph::Vertex(0), 2);
    let locus = d_weierstrass_locus(&c, &d).unwrap();
    // D_P(P) = 2 exactly when 2P ~ 2O
    assert!(locus.contains(&PointOnGraph::Vertex(0)));
    assert!(locus.contains(&c.point(0, rat(2)).unwrap()));
    assert!(!locus.contains(&c.point(0, rat(1)).unwrap()));
    let neg = Divisor::point(PointOnGraph::Vertex(0), -1);
    assert!(d_weierstrass_locus(&c, &neg).unwrap().is_empty());
}

#[test]
fn random_very_ample_matches_pointwise_collisions() {
    let mut rng = common::rng(41);
    for _ in 0..25 {
        let g = common::random_graph(&mut rng, 3, 2, 3);
        let d = common::random_effective(&mut rng, &g, 2, 3);
        let v = very_ample_exact(&g, &d).unwrap();
        if let Some((p, q)) = &v.witness {
            assert_ne!(p, q);
            assert_eq!(red(&g, &d, p).unwrap(), red(&g, &d, q).unwrap());
        } else {
            // sample pairs must have distinct images
            let mut seen = std::collections::HashMap::new();
            for e in 0..g.num_edges() {
                let len = &g.edge(e).length;
                for k in 0..=6 {
                    let p = g.point(e, len * frac(k, 6)).unwrap();
                    let image = red(&g, &d, &p).unwrap();
                    if let Some(q) = seen.insert(image, p.clone()) {
                        assert_eq!(q, p);
                    }
                }
            }
        }
    }
}
