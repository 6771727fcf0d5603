use num_traits::One;
use relout::fixture::load_bundled;
use relout::freeprod::{FPAutomorphism, Word};
use relout::limits::*;
use relout::minset::{explore, lambda_min, ExploreOptions, SimplexStatus};
use relout::rational::{from_f64, q, qi, to_f64, Interval, Q};
use relout::traintrack::{SearchOptions, TrainTrackResult};

fn golden() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

fn tt(name: &str, inverse: bool) -> (FPAutomorphism, TrainTrackResult) {
    let fx = load_bundled(name).unwrap();
    let mut phi = fx.automorphism("phi").unwrap().clone();
    if inverse {
        phi = phi.invert();
    }
    let (_, t) = lambda_min(fx.point("rose-unit").unwrap(), &phi, &SearchOptions::default()).unwrap();
    (phi, t)
}

fn word(phi: &FPAutomorphism, s: &str) -> Word {
    phi.fs().parse_word(s).unwrap()
}

// Independent route: free-group words as signed letters, φ(a) = b, φ(b) = ab, golden metric.
fn fib_image(w: &[i8]) -> Vec<i8> {
    let mut out: Vec<i8> = Vec::new();
    for &x in w {
        let img: Vec<i8> = match x {
            1 => vec![2],
            -1 => vec![-2],
            2 => vec![1, 2],
            _ => vec![-2, -1],
        };
        for y in img {
            if out.last() == Some(&-y) {
                out.pop();
            } else {
                out.push(y);
            }
        }
    }
    out
}

fn cyclic_core(w: &[i8]) -> &[i8] {
    let (mut i, mut j) = (0, w.len());
    while j > i + 1 && w[i] == -w[j - 1] {
        i += 1;
        j -= 1;
    }
    &w[i..j]
}

fn fib_oracle(w: &[i8], n: usize) -> f64 {
    let g = golden();
    let mut cur = w.to_vec();
    for _ in 0..n {
        cur = fib_image(&cur);
    }
    let len: f64 = cyclic_core(&cur).iter().map(|&x| if x.abs() == 1 { 1.0 / (g * g) } else { 1.0 / g }).sum();
    len / g.powi(n as i32)
}

#[test]
fn golden_rose_limits_match_direct_iteration() {
    let (phi, t) = tt("FIB", false);
    let xl = LimitLengthFunction::new(t.map.clone()).unwrap();
    assert!((to_f64(&xl.lambda.lo) - golden()).abs() < 1e-15);
    let o = LimitOptions::default();
    let cases: [(&str, &[i8]); 5] =
        [("a", &[1]), ("b", &[2]), ("a b^-1", &[1, -2]), ("a b a b^-1", &[1, 2, 1, -2]), ("a^2 b^-1 a", &[1, 1, -2, 1])];
    for (s, w) in cases {
        let r = xl.attracting_length(&word(&phi, s), &o);
        let expect = fib_oracle(w, 30);
        assert!(r.monotone, "{s}");
        assert!(r.converged, "{s}");
        assert!(r.interval.width() < q(1, 1_000_000), "{s}");
        let mid = to_f64(&r.interval.mid());
        assert!((mid - expect).abs() < 1e-7, "{s}: {mid} vs {expect}");
    }
    // golden metric is the eigenmetric: a is legal and keeps its length
    let a = xl.attracting_length(&word(&phi, "a"), &o);
    assert!((to_f64(&a.interval.lo) - 1.0 / (golden() * golden())).abs() < 1e-12);
}

#[test]
fn elliptic_and_periodic_classes_vanish() {
    let (phi, t) = tt("FIB", false);
    let xl = LimitLengthFunction::new(t.map.clone()).unwrap();
    let o = LimitOptions::default();
    assert_eq!(xl.attracting_length(&Word::empty(), &o).interval, Interval::zero());
    let c = xl.attracting_length(&word(&phi, "a b a^-1 b^-1"), &o);
    assert!(c.periodic && c.is_exact_zero());

    let (sphi, st) = tt("SWAP", false);
    let sl = LimitLengthFunction::new(st.map.clone()).unwrap();
    assert!((to_f64(&sl.lambda.lo) - golden().sqrt()).abs() < 1e-12);
    for s in ["a b a^-1 b^-1", "c d c^-1 d^-1"] {
        let r = sl.attracting_length(&word(&sphi, s), &o);
        assert!(r.periodic && r.is_exact_zero(), "{s}");
    }
    assert!(sl.attracting_length(&word(&sphi, "a"), &o).interval.lo > qi(0));
}

#[test]
fn sequence_is_monotone_up_to_cancellation() {
    let (phi, t) = tt("FIB", false);
    let xl = LimitLengthFunction::new(t.map.clone()).unwrap();
    let g = word(&phi, "a a b a^-1 b^-1 a^-1 b");
    let seq = xl.normalized_sequence(&g, 12);
    let ng = qi(xl.point().loop_of(&g).unwrap().len() as i64);
    let mut pow = Interval::point(Q::one());
    for w in seq.windows(2) {
        pow = &pow * &xl.lambda;
        let slack = qi(2) * &xl.bcc * &ng / &pow.lo;
        assert!(w[1].lo <= &w[0].hi * &xl.kappa + slack);
    }
}

#[test]
fn scale_equivariance() {
    let (phi, t) = tt("FIB", false);
    let xl = LimitLengthFunction::new(t.map.clone()).unwrap();
    let c = q(7, 3);
    let yl = xl.rescale(&c).unwrap();
    let o = LimitOptions::default();
    for s in ["a", "a b^-1", "b a b a^-1"] {
        let g = word(&phi, s);
        let x = xl.attracting_length(&g, &o).interval.scale(&c);
        let y = yl.attracting_length(&g, &o).interval;
        assert!(x.overlaps(&y), "{s}");
    }
}

#[test]
fn twist_scales_by_lambda() {
    for name in ["FIB", "FIB_INV"] {
        let (phi, t) = tt(name, false);
        let xl = LimitLengthFunction::new(t.map.clone()).unwrap();
        let o = LimitOptions::default();
        for s in ["a", "b", "a b^-1", "a a b", "b a^-1 b"] {
            let c = twist_check(&xl, &word(&phi, s), &o);
            assert!(c.ok, "{name} {s}: {:?} vs {:?}", c.twisted, c.scaled);
        }
    }
}

#[test]
fn homothety_between_translates() {
    let (phi, t) = tt("FIB", false);
    let xl = LimitLengthFunction::new(t.map.clone()).unwrap();
    let y = xl.point().twist(&phi);
    let yl = LimitLengthFunction::at(&y, &phi).unwrap();
    let o = LimitOptions::default();
    let sample: Vec<Word> = ["a", "b", "a b^-1", "a a b", "a b a^-1 b^-1"].iter().map(|s| word(&phi, s)).collect();
    // with ℓ_{Xφ}(g) = ℓ_X(φg), (Xφ)∞ = λ X∞
    let h = homothety_check(&xl, &yl, &sample, &o);
    assert!(h.ok);
    let inv = Interval::point(Q::one()).div(&xl.lambda);
    assert!(h.factor.overlaps(&inv), "{:?}", h.factor);
    let back = homothety_check(&yl, &xl, &sample, &o);
    assert!(back.ok);
    assert!(back.factor.overlaps(&xl.lambda), "{:?}", back.factor);
    let same = homothety_check(&xl, &xl, &sample, &o);
    assert!(same.factor.contains(&Q::one()));
}

#[test]
fn homothety_with_theta_min_point() {
    let (phi, t) = tt("FIB", false);
    let atlas = explore(&phi, &t, &ExploreOptions::default()).unwrap();
    let theta = atlas
        .simplices
        .iter()
        .find(|s| s.status == SimplexStatus::Min && s.point.num_edges() == 3 && s.tt.is_some())
        .expect("theta simplex in Min");
    let xl = LimitLengthFunction::new(t.map.clone()).unwrap();
    let yl = LimitLengthFunction::new(theta.tt.as_ref().unwrap().map.clone()).unwrap();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(11);
    let o = LimitOptions { max_steps: 20_000, ..Default::default() };
    let sample: Vec<Word> = (0..50).map(|_| phi.fs().random_word(&mut rng, 6, 2)).collect();
    let h = homothety_check(&xl, &yl, &sample, &o);
    assert!(h.ok);
    assert!(h.factor.lo > qi(0));
}

#[test]
fn discreteness_on_fibonacci() {
    let (phi, t) = tt("FIB", false);
    let (_, ti) = tt("FIB", true);
    let xl = LimitLengthFunction::new(t.map.clone()).unwrap();
    let yl = LimitLengthFunction::new(ti.map.clone()).unwrap();
    let rep = discreteness_scan(&xl, &yl, 6, &LimitOptions::default());
    assert!(rep.violations.is_empty());
    assert!(rep.epsilon.as_ref().unwrap() > &qi(0));
    assert!(rep.exact_zero >= 1);
    let comm = word(&phi, "a b a^-1 b^-1");
    let key = phi.fs().class_key(&comm);
    let e = rep.entries.iter().find(|e| phi.fs().class_key(&e.g) == key).unwrap();
    assert_eq!(e.class, ScanClass::BothZero { exact: true });
}

#[test]
fn eigen_ratio_bound_covers_true_ratio() {
    assert_eq!(eigen_ratio_bound(&vec![vec![1, 1], vec![1, 1]], &[q(1, 2), q(1, 2)]).unwrap(), Q::one());
    let m = vec![vec![0, 1], vec![1, 1]];
    let g = golden();
    let l = [from_f64(0.38), from_f64(0.62)];
    let u = [1.0 / (g * g), 1.0 / g];
    let r0 = to_f64(&l[0]) / u[0];
    let r1 = to_f64(&l[1]) / u[1];
    let truth = r0.max(r1) / r0.min(r1);
    let k = to_f64(&eigen_ratio_bound(&m, &l).unwrap());
    assert!(k >= truth, "{k} < {truth}");
    assert!(eigen_ratio_bound(&m, &[q(99, 100), q(1, 100)]).is_err());
}

#[test]
fn classification_rules() {
    let z = LimitLength { interval: Interval::zero(), n: 0, converged: true, periodic: true, monotone: true, n_g: 1 };
    let p = LimitLength { interval: Interval::new(q(1, 3), q(1, 2)), ..z.clone() };
    let u = LimitLength { interval: Interval::new(qi(0), q(1, 2)), ..z.clone() };
    assert_eq!(classify_pair(&z, &z), ScanClass::BothZero { exact: true });
    assert_eq!(classify_pair(&z, &p), ScanClass::Violation);
    assert_eq!(classify_pair(&u, &p), ScanClass::Positive(q(1, 3)));
    assert_eq!(classify_pair(&u, &u), ScanClass::BothZero { exact: false });
}
