use std::collections::BTreeSet;

use num_traits::Signed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relout::candidates::{candidate_elements, candidates, enumerate_shapes, shape_vector, ShapeKind};
use relout::fixture::{load_bundled, parse_fixture};
use relout::freeprod::Word;
use relout::lipschitz::random_metric;
use relout::marked_graph::MarkedGraph;
use relout::rational::{q, Q};

const SEGMENT: &str = r#"{
  "name": "SEG",
  "factors": {"free_rank": 0, "vertex_groups": [{"name": "x", "cyclic": 2}, {"name": "y", "cyclic": 2}]},
  "points": {
    "seg": {
      "vertices": [{"name": "p", "group": "x"}, {"name": "r", "group": "y"}],
      "edges": [{"name": "e", "from": "p", "to": "r", "length": "2/7"}],
      "base": "p",
      "marking": {"groups": {"x": {"path": ""}, "y": {"path": "e"}}}
    }
  },
  "automorphisms": {},
  "params": {}
}"#;

/// Conjugacy classes up to inversion, via the library's own conjugacy test.
fn classes(x: &MarkedGraph, words: &[Word]) -> Vec<Word> {
    let fs = x.fs();
    let mut out: Vec<Word> = Vec::new();
    for w in words {
        let dup = out
            .iter()
            .any(|u| fs.is_conjugate(u, w).is_some() || fs.is_conjugate(u, &fs.inverse(w)).is_some());
        if !dup {
            out.push(w.clone());
        }
    }
    out
}

fn kinds(x: &MarkedGraph) -> BTreeSet<ShapeKind> {
    enumerate_shapes(&x.graph).into_iter().map(|s| s.kind).collect()
}

#[test]
fn rose_candidates() {
    let fx = load_bundled("FIB").unwrap();
    let r = fx.point("rose-unit").unwrap();
    let shapes = enumerate_shapes(&r.graph);
    assert_eq!(shapes.iter().filter(|s| s.kind == ShapeKind::O).count(), 2);
    assert_eq!(shapes.iter().filter(|s| s.kind == ShapeKind::Figure8).count(), 2);
    assert_eq!(shapes.len(), 4);
    let fs = r.fs();
    let got = classes(r, &candidate_elements(r));
    assert_eq!(got.len(), 4);
    for s in ["a", "b", "a b", "a b^-1"] {
        let w = fs.parse_word(s).unwrap();
        assert!(
            got.iter().any(|u| fs.is_conjugate(u, &w).is_some() || fs.is_conjugate(u, &fs.inverse(&w)).is_some()),
            "{s} missing"
        );
    }
}

#[test]
fn lollipop_candidates() {
    let fx = load_bundled("LOLLI").unwrap();
    let x = fx.point("Xn").unwrap();
    assert_eq!(kinds(x), BTreeSet::from([ShapeKind::O, ShapeKind::DegenBarbell]));
    let fs = x.fs();
    let got = classes(x, &candidate_elements(x));
    assert_eq!(got.len(), 2);
    let ga = fs.parse_word("g[1] a").unwrap();
    let c = candidates(x).into_iter().find(|c| c.kind == ShapeKind::DegenBarbell).unwrap();
    assert!(fs.is_conjugate(&c.word, &ga).is_some() || fs.is_conjugate(&c.word, &fs.inverse(&ga)).is_some());
    // loop plus twice the segment
    let (s, l) = (&x.lengths[0], &x.lengths[1]);
    assert_eq!(x.translation_length(&ga), l + s * Q::from_integer(2.into()));
    assert_eq!(shape_vector(x, &ga).unwrap(), vec![2, 1]);
}

#[test]
fn segment_between_group_vertices() {
    let fx = parse_fixture(SEGMENT).unwrap();
    let x = fx.point("seg").unwrap();
    assert_eq!(kinds(x), BTreeSet::from([ShapeKind::DoubleDegenBarbell]));
    let words = candidate_elements(x);
    let fs = x.fs();
    let xy = fs.parse_word("x[1] y[1]").unwrap();
    assert_eq!(classes(x, &words).len(), 1);
    assert!(fs.is_conjugate(&words[0], &xy).is_some() || fs.is_conjugate(&words[0], &fs.inverse(&xy)).is_some());
    // the tree is a line with vertices every L; x and y reflect about 0 and L
    let len = q(2, 7);
    let refl_x = |t: Q| -t;
    let refl_y = |t: Q| &len * Q::from_integer(2.into()) - t;
    let p = q(5, 3);
    let moved = refl_x(refl_y(p.clone()));
    assert_eq!(x.translation_length(&xy), (moved - p).abs());
}

#[test]
fn lengths_are_linear_in_the_metric() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, point) in [("FIB", "theta"), ("FIB", "barbell"), ("LOLLI", "Xn"), ("W3", "tripod"), ("SWAP", "rose-unit")] {
        let fx = load_bundled(name).unwrap();
        let x = fx.point(point).unwrap();
        let cands = candidates(x);
        assert!(!cands.is_empty());
        for _ in 0..50 {
            let y = random_metric(x, &mut rng, 30);
            for c in &cands {
                let dot: Q = c.transition.iter().zip(&y.lengths).map(|(k, l)| l * Q::from_integer((*k).into())).sum();
                assert_eq!(y.translation_length(&c.word), dot);
            }
        }
    }
}

#[test]
fn candidates_depend_only_on_the_simplex() {
    let fx = load_bundled("FIB").unwrap();
    let x = fx.point("theta").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let y = random_metric(x, &mut rng, 100);
    assert_eq!(candidate_elements(x), candidate_elements(&y));
}
