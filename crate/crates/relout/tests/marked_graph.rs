use num_traits::Zero;
use relout::fixture::load_bundled;
use relout::graph::{Core, OEdge, Path, Step};
use relout::marked_graph::MarkedGraph;
use relout::rational::{q, qi, Q};

fn word(x: &MarkedGraph, s: &str) -> relout::freeprod::Word {
    x.fs().parse_word(s).unwrap()
}

#[test]
fn bundled_fixtures_parse() {
    for name in relout::fixture::BUNDLED {
        let fx = load_bundled(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(!fx.points.is_empty());
        assert!(fx.automorphisms.contains_key("phi"));
    }
}

#[test]
fn rose_loops_and_lengths() {
    let fx = load_bundled("FIB").unwrap();
    let r = fx.point("rose-unit").unwrap();
    let l = r.loop_of(&word(r, "a b")).unwrap();
    let names: Vec<_> = l.steps.iter().map(|s| r.graph.edges[s.edge.edge()].name.clone()).collect();
    assert_eq!(names, ["ea", "eb"]);
    assert_eq!(r.translation_length(&word(r, "a b")), qi(2));
    assert_eq!(r.translation_length(&word(r, "1")), Q::zero());
    assert_eq!(r.volume(), qi(2));
    assert_eq!(r.rescale(&q(1, 2)).unwrap().volume(), qi(1));
    assert!(r.rescale(&qi(0)).is_err());
    let phi = fx.automorphism("phi").unwrap();
    let img = phi.apply(&word(r, "b"));
    assert_eq!(r.shape(&img), vec![1, 1]);
}

#[test]
fn lollipop_lengths() {
    let fx = load_bundled("LOLLI").unwrap();
    let xn = fx.point("Xn").unwrap();
    assert_eq!(xn.volume(), q(2, 3));
    assert_eq!(xn.translation_length(&word(xn, "a")), q(1, 3));
    assert_eq!(xn.translation_length(&word(xn, "g[1] a")), qi(1));
    assert_eq!(xn.shape(&word(xn, "g[1] a")), vec![2, 1]);
    assert_eq!(xn.translation_length(&word(xn, "g[1]")), Q::zero());
    // the loop of g a crosses s, l, -s and carries the decoration at the group vertex
    let l = xn.loop_of(&word(xn, "g[1] a")).unwrap();
    assert_eq!(l.len(), 3);
    assert_eq!(l.steps.iter().filter(|s| s.dec == 1).count(), 1);
}

#[test]
fn reduce_blocks_on_decorations() {
    let fx = load_bundled("LOLLI").unwrap();
    let xn = fx.point("Xn").unwrap();
    let g = &*xn.graph;
    let s = OEdge::new(0, false);
    // s -s with trivial decoration at w cancels
    let p = Path { start: 0, init: 0, steps: vec![Step { edge: s, dec: 0 }, Step { edge: s.inv(), dec: 0 }] };
    assert!(g.reduce(&p).steps.is_empty());
    // -s [1] s at the group vertex does not
    let p = Path { start: 1, init: 0, steps: vec![Step { edge: s.inv(), dec: 1 }, Step { edge: s, dec: 0 }] };
    assert_eq!(g.reduce(&p).steps.len(), 2);
    let (_, core) = g.cyclic_core(&p);
    assert!(matches!(core, Core::Elliptic { vertex: 0, dec: 1 }));
}

#[test]
fn collapse_segment_gives_circle() {
    let fx = load_bundled("LOLLI").unwrap();
    let xn = fx.point("Xn").unwrap();
    let c = xn.collapse_forest(&[0]).unwrap();
    assert_eq!(c.graph.num_vertices(), 1);
    assert_eq!(c.graph.num_edges(), 1);
    assert!(c.graph.vertices[0].group.is_some());
    let x = fx.point("X").unwrap().with_lengths(vec![q(1, 3)]).unwrap();
    assert!(c.points_equal(&x).is_some());
}

#[test]
fn theta_collapse_gives_rose() {
    let fx = load_bundled("FIB").unwrap();
    let th = fx.point("theta").unwrap();
    for e in 0..3 {
        let r = th.collapse_forest(&[e]).unwrap();
        assert_eq!(r.graph.num_vertices(), 1);
        for s in ["a", "b", "a b", "a b^-1", "a^2 b^-3 a"] {
            let w = word(th, s);
            let mut zeroed = th.lengths.clone();
            zeroed[e] = Q::zero();
            let l = th.loop_of(&w).unwrap();
            let expect: Q = l.steps.iter().map(|st| zeroed[st.edge.edge()].clone()).sum();
            assert_eq!(r.translation_length(&w), expect, "{s} after collapsing {e}");
        }
    }
    assert!(th.collapse_forest(&[0, 1]).is_err());
}

#[test]
fn face_at_infinity_detected() {
    let fx = load_bundled("W3").unwrap();
    let t = fx.point("tripod").unwrap();
    assert_eq!(t.collapse_forest(&[0, 1]), Err(relout::Error::FaceAtInfinity));
    assert!(t.collapse_forest(&[0]).is_ok());
}

#[test]
fn blow_ups_round_trip() {
    let fx = load_bundled("FIB").unwrap();
    let r = fx.point("rose-unit").unwrap();
    let eps = q(1, 100);
    let ups = r.blow_ups(0, &eps);
    // two-by-two partitions of the four ends at the rose vertex
    assert_eq!(ups.len(), 3);
    for b in &ups {
        let back = b.point.collapse_forest(&[b.new_edge]).unwrap();
        assert!(back.points_equal(r).is_some());
    }
    let th = fx.point("theta").unwrap();
    assert!(th.blow_ups(0, &eps).is_empty());
    let lolli = load_bundled("LOLLI").unwrap();
    let xn = lolli.point("Xn").unwrap();
    assert!(xn.blow_ups(0, &eps).is_empty());
    let x = lolli.point("X").unwrap();
    let ups = x.blow_ups(0, &eps);
    assert!(!ups.is_empty());
    for b in &ups {
        let back = b.point.collapse_forest(&[b.new_edge]).unwrap();
        assert!(back.points_equal(x).is_some());
    }
}

#[test]
fn inner_twists_are_invisible() {
    let fx = load_bundled("LOLLI").unwrap();
    let xn = fx.point("Xn").unwrap();
    let w = word(xn, "a g[1] a^-2");
    let inner = relout::freeprod::FPAutomorphism::inner(xn.fs().clone(), &w);
    assert!(xn.points_equal(&xn.twist(&inner)).is_some());
    let phi_g = fx.automorphism("phi_g").unwrap();
    assert!(xn.points_equal(&xn.twist(phi_g)).is_none());
    let x = fx.point("X").unwrap();
    assert!(x.points_equal(&x.twist(phi_g)).is_some());
}

#[test]
fn twist_matches_substitution() {
    for name in ["FIB", "LOLLI", "W3", "SWAP"] {
        let fx = load_bundled(name).unwrap();
        let phi = fx.automorphism("phi").unwrap();
        for x in fx.points.values() {
            let y = x.twist(phi);
            for g in x.fs().generators() {
                assert_eq!(y.translation_length(&g), x.translation_length(&phi.apply(&g)));
            }
        }
    }
}
