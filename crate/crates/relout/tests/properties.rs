use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relout::fixture::{load_bundled, parse_fixture, Fixture};
use relout::freeprod::Word;
use relout::limits::{LimitLengthFunction, LimitOptions};
use relout::lipschitz::{random_metric, stretch};
use relout::marked_graph::MarkedGraph;
use relout::minset::lambda_min;
use relout::rational::{fmt_q, parse_q, q, Q};
use relout::traintrack::SearchOptions;

const NAMES: [&str; 6] = ["FIB", "FIB_INV", "LOLLI", "FLIP", "W3", "SWAP"];

fn fx(i: usize) -> Fixture {
    load_bundled(NAMES[i % NAMES.len()]).unwrap()
}

fn word(f: &Fixture, seed: u64, len: usize) -> Word {
    f.fs.random_word(&mut ChaCha8Rng::seed_from_u64(seed), len, 3)
}

fn metric(f: &Fixture, seed: u64) -> MarkedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<&MarkedGraph> = f.points.values().collect();
    random_metric(pts[rng.gen_range(0..pts.len())], &mut rng, 16)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn word_inverse_cancels(i in 0usize..6, seed: u64, len in 0usize..10) {
        let f = fx(i);
        let w = word(&f, seed, len);
        prop_assert!(f.fs.mul(&w, &f.fs.inverse(&w)).is_empty());
        prop_assert_eq!(f.fs.inverse(&f.fs.inverse(&w)), w);
    }

    #[test]
    fn word_format_roundtrip(i in 0usize..6, seed: u64, len in 0usize..10) {
        let f = fx(i);
        let w = word(&f, seed, len);
        prop_assert_eq!(f.fs.parse_word(&f.fs.format_word(&w)).unwrap(), w);
    }

    #[test]
    fn multiplication_associates(i in 0usize..6, seed: u64) {
        let f = fx(i);
        let (a, b, c) = (word(&f, seed, 4), word(&f, seed ^ 1, 4), word(&f, seed ^ 2, 4));
        prop_assert_eq!(f.fs.mul(&f.fs.mul(&a, &b), &c), f.fs.mul(&a, &f.fs.mul(&b, &c)));
    }

    #[test]
    fn cyclic_reduction_is_conjugate(i in 0usize..6, seed: u64, len in 1usize..8) {
        let f = fx(i);
        let g = word(&f, seed, len);
        let h = f.fs.conj(&word(&f, seed ^ 7, 3), &g);
        prop_assert!(f.fs.is_conjugate(&g, &h).is_some());
        prop_assert_eq!(f.fs.class_key(&g), f.fs.class_key(&h));
    }

    #[test]
    fn automorphism_inverse_is_identity(i in 0usize..6, seed: u64, len in 0usize..6) {
        let f = fx(i);
        let g = word(&f, seed, len);
        for phi in f.automorphisms.values() {
            prop_assert_eq!(phi.apply_inverse(&phi.apply(&g)), g.clone());
        }
    }

    #[test]
    fn rationals_roundtrip(n in -10_000i64..10_000, d in 1i64..10_000) {
        let x = q(n, d);
        prop_assert_eq!(parse_q(&fmt_q(&x)).unwrap(), x);
    }

    #[test]
    fn translation_length_is_conjugation_invariant(i in 0usize..6, seed: u64, len in 1usize..6) {
        let f = fx(i);
        let x = metric(&f, seed);
        let g = word(&f, seed, len);
        let h = f.fs.conj(&word(&f, seed ^ 3, 3), &g);
        prop_assert_eq!(x.translation_length(&g), x.translation_length(&h));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stretch_is_multiplicative_triangle(i in 0usize..5, seed: u64) {
        let f = fx(i);
        let (x, y, z) = (metric(&f, seed), metric(&f, seed ^ 1), metric(&f, seed ^ 2));
        prop_assert!(stretch(&x, &z) <= stretch(&x, &y) * stretch(&y, &z));
        prop_assert_eq!(stretch(&x, &x), Q::from_integer(1.into()));
    }

    #[test]
    fn stretch_is_twist_equivariant(i in 0usize..5, seed: u64) {
        let f = fx(i);
        let (x, y) = (metric(&f, seed), metric(&f, seed ^ 1));
        for phi in f.automorphisms.values() {
            prop_assert_eq!(stretch(&x.twist(phi), &y.twist(phi)), stretch(&x, &y));
        }
    }

    #[test]
    fn fixture_json_roundtrip(i in 0usize..6) {
        let f = fx(i);
        let back = parse_fixture(&f.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), f.to_json());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn limit_lengths_scale_with_the_metric(seed: u64, num in 1i64..9, den in 1i64..9) {
        let f = load_bundled("FIB").unwrap();
        let phi = f.automorphism("phi").unwrap();
        let tt = lambda_min(f.point("rose-unit").unwrap(), phi, &SearchOptions::default()).unwrap().1;
        let xl = LimitLengthFunction::new(tt.map).unwrap();
        let c = q(num, den);
        let yl = xl.rescale(&c).unwrap();
        let g = word(&f, seed, 4);
        let opts = LimitOptions { max_steps: 5_000, ..Default::default() };
        let (a, b) = (xl.attracting_length(&g, &opts), yl.attracting_length(&g, &opts));
        prop_assert!(a.interval.scale(&c).overlaps(&b.interval));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parsers_reject_garbage_without_panicking(s in "[ab xyzeg\\[\\]0-9^\\-]{0,24}") {
        let f = load_bundled("LOLLI").unwrap();
        let _ = relout::fixture::parse_word_bounded(&f.fs, &s);
        let x = f.point("X").unwrap();
        let _ = relout::fixture::parse_path(&x.graph, x.base, &s);
        let _ = parse_fixture(&s);
    }
}
