//! Length functions of the attracting and repelling limit trees, with certified error.

use std::collections::{HashMap, HashSet};
use std::sync::Mutex;

use num_traits::{One, Signed, Zero};

use crate::candidates::candidates;
use crate::error::{Error, Result};
use crate::freeprod::{FPAutomorphism, Syllable, Word};
use crate::graph::{Loop, Step};
use crate::marked_graph::MarkedGraph;
use crate::pf::{self, mat_pow, Matrix};
use crate::rational::{from_f64, q, qi, round_down, round_up, Interval, Q};
use crate::traintrack::dynamics::bcc_bound;
use crate::traintrack::{build_map, gate_structures, is_train_track, GateStructure, GraphMap};

const BITS: u32 = 160;

#[derive(Clone, Debug)]
pub struct LimitOptions {
    pub tol: Q,
    pub max_power: usize,
    /// Iteration stops once the loop has more edges than this.
    pub max_steps: usize,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions { tol: q(1, 1_000_000_000), max_power: 64, max_steps: 200_000 }
    }
}

/// Enclosure of ℓ_{X∞}(g) and how it was obtained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LimitLength {
    pub interval: Interval,
    /// Last power of φ applied.
    pub n: usize,
    pub converged: bool,
    /// The conjugacy class is φ-periodic, so the limit is exactly 0.
    pub periodic: bool,
    /// Every step satisfied a_{n+1} ≤ κ·a_n + 2·B·n_g/λ^{n+1} and the enclosures were nested-consistent.
    pub monotone: bool,
    pub n_g: usize,
}

impl LimitLength {
    fn exact_zero(n: usize, periodic: bool, n_g: usize) -> Self {
        LimitLength { interval: Interval::zero(), n, converged: true, periodic, monotone: true, n_g }
    }

    pub fn is_exact_zero(&self) -> bool {
        self.interval.hi.is_zero()
    }
}

/// ℓ_{X∞}(g) = lim ℓ_X(φⁿg)/λⁿ for a train-track representative f on X.
#[derive(Debug)]
pub struct LimitLengthFunction {
    pub map: GraphMap,
    pub gates: GateStructure,
    pub lambda: Interval,
    pub bcc: Q,
    /// Certified bound on max(l/u)/min(l/u) for l the metric of X and u the exact eigenmetric.
    pub kappa: Q,
    cache: Mutex<HashMap<(Vec<Syllable>, Q, bool), LimitLength>>,
}

/// Upper bound on the Hilbert-metric spread between `l` and the PF eigenvector of `m`.
pub fn eigen_ratio_bound(m: &Matrix, l: &[Q]) -> Result<Q> {
    let n = m.len();
    if !pf::is_irreducible(m) {
        return Err(Error::ReducibleMatrix);
    }
    let mut ipm = m.clone();
    for (i, row) in ipm.iter_mut().enumerate() {
        row[i] += 1;
    }
    let a = mat_pow(&ipm, n.saturating_sub(1).max(1) as u32);
    let al: Vec<Q> = a.iter().map(|row| row.iter().zip(l).map(|(&c, x)| Q::from_integer(c.into()) * x).sum()).collect();
    let ratios: Vec<Q> = al.iter().zip(l).map(|(y, x)| y / x).collect();
    let rmax = ratios.iter().max().unwrap().clone();
    let rmin = ratios.iter().min().unwrap().clone();
    let spread = rmax / rmin - Q::one();
    // projective diameter of A applied to the positive cone
    let mut theta = Q::one();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for h in 0..n {
                    let num = a[i][j] as u128 * a[k][h] as u128;
                    let den = a[i][h] as u128 * a[k][j] as u128;
                    let t = Q::new(num.into(), den.into());
                    if t > theta {
                        theta = t;
                    }
                }
            }
        }
    }
    let mut s = from_f64(crate::rational::to_f64(&theta).sqrt() * (1.0 + 1e-12));
    while &s * &s < theta {
        s = &s * q(1_000_001, 1_000_000);
    }
    let tau = (&s - Q::one()) / (&s + Q::one());
    let d = spread / (Q::one() - tau);
    if d >= q(1, 2) {
        return Err(Error::Hypothesis("metric is too far from the eigenmetric to certify limits".into()));
    }
    Ok(round_up(&(Q::one() / (Q::one() - d)), BITS))
}

/// Least rotation of a cyclic step sequence.
fn rotation_key(steps: &[Step]) -> Vec<Step> {
    let n = steps.len();
    (0..n)
        .map(|r| steps[r..].iter().chain(&steps[..r]).copied().collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

impl LimitLengthFunction {
    pub fn new(f: GraphMap) -> Result<Self> {
        let check = is_train_track(&f);
        if !check.ok {
            return Err(Error::NotTrainTrack(format!("{:?}", check.witness)));
        }
        let m = f.transition_matrix();
        if !pf::is_irreducible(&m) {
            return Err(Error::ReducibleMatrix);
        }
        let lambda = pf::pf_enclosure(&m, &q(1, 10).pow(30))?.lambda;
        if lambda.lo <= Q::one() {
            return Err(Error::NotExpanding);
        }
        let kappa = eigen_ratio_bound(&m, &f.x.lengths)?;
        let bcc = bcc_bound(&f);
        let gates = gate_structures(&f).1;
        Ok(LimitLengthFunction { map: f, gates, lambda, bcc, kappa, cache: Mutex::new(HashMap::new()) })
    }

    /// Builds a representative of φ on `x` and certifies it.
    pub fn at(x: &MarkedGraph, phi: &FPAutomorphism) -> Result<Self> {
        Self::new(build_map(x, phi))
    }

    pub fn point(&self) -> &MarkedGraph {
        &self.map.x
    }

    /// Same map on c·X.
    pub fn rescale(&self, c: &Q) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::NonPositiveScale);
        }
        let mut f = self.map.clone();
        f.x = self.map.x.rescale(c)?;
        Self::new(f)
    }

    /// Enclosure of ℓ_{X∞}(g), refined until its width is at most `tol` or a cap is hit.
    pub fn attracting_length(&self, g: &Word, opts: &LimitOptions) -> LimitLength {
        self.cached(g, opts, false)
    }

    /// Refines only until the enclosure is bounded away from 0 or has width at most `tol`.
    pub fn decide(&self, g: &Word, opts: &LimitOptions) -> LimitLength {
        self.cached(g, opts, true)
    }

    fn cached(&self, g: &Word, opts: &LimitOptions, decisive: bool) -> LimitLength {
        let key = (self.map.x.fs().class_key(g), opts.tol.clone(), decisive);
        if let Some(r) = self.cache.lock().unwrap().get(&key) {
            return r.clone();
        }
        let r = self.compute(g, opts, decisive);
        self.cache.lock().unwrap().insert(key, r.clone());
        r
    }

    fn compute(&self, g: &Word, opts: &LimitOptions, decisive: bool) -> LimitLength {
        let x = &self.map.x;
        let Ok(mut cur) = x.loop_of(g) else { return LimitLength::exact_zero(0, false, 0) };
        let ng = cur.len();
        let (lam_lo, lam_hi) = (&self.lambda.lo, &self.lambda.hi);
        let two_b = qi(2) * &self.bcc;
        let mut pow_lo = Q::one();
        let mut pow_hi = Q::one();
        let mut seen: HashSet<Vec<Step>> = HashSet::new();
        let mut best: Option<Interval> = None;
        let mut prev_hi: Option<Q> = None;
        let mut monotone = true;
        let mut n = 0;
        loop {
            if cur.len() <= 512 && !seen.insert(rotation_key(&cur.steps)) {
                return LimitLength::exact_zero(n, true, ng);
            }
            let len = x.steps_length(&cur.steps);
            let k = self.gates.illegal_turns(x, &cur.steps, true).len();
            let raw_lo = &len / &pow_hi;
            let raw_hi = &len / &pow_lo;
            if let Some(p) = &prev_hi {
                let slack = &two_b * qi(ng as i64) / &pow_lo;
                if raw_lo > &self.kappa * p + slack {
                    monotone = false;
                }
            }
            let r = &two_b * qi(k as i64) / (&pow_lo * (lam_lo - Q::one()));
            let lo = (&raw_lo / &self.kappa - r).max(Q::zero());
            let hi = &self.kappa * &raw_hi;
            let here = Interval::new(round_down(&lo, BITS).max(Q::zero()), round_up(&hi, BITS));
            let joined = match &best {
                None => here,
                Some(b) => b.intersect(&here).unwrap_or_else(|| {
                    monotone = false;
                    here
                }),
            };
            let done = joined.width() <= opts.tol || (decisive && joined.lo.is_positive());
            best = Some(joined);
            prev_hi = Some(raw_hi);
            if done || n >= opts.max_power || cur.len() > opts.max_steps {
                let converged = best.as_ref().unwrap().width() <= opts.tol;
                return LimitLength { interval: best.unwrap(), n, converged, periodic: false, monotone, n_g: ng };
            }
            match self.map.apply_loop(&cur) {
                Some(next) => cur = next,
                None => return LimitLength::exact_zero(n + 1, false, ng),
            }
            pow_lo = round_down(&(&pow_lo * lam_lo), BITS);
            pow_hi = round_up(&(&pow_hi * lam_hi), BITS);
            n += 1;
        }
    }

    /// Enclosures of ℓ_X(φⁿg)/λⁿ for n = 0..=steps (no limit certificate).
    pub fn normalized_sequence(&self, g: &Word, steps: usize) -> Vec<Interval> {
        let x = &self.map.x;
        let Ok(l) = x.loop_of(g) else { return vec![Interval::zero(); steps + 1] };
        let mut cur: Option<Loop> = Some(l);
        let mut pow = Interval::point(Q::one());
        let mut out = Vec::new();
        for _ in 0..=steps {
            let len = cur.as_ref().map_or_else(Q::zero, |c| x.steps_length(&c.steps));
            out.push(Interval::point(len).div(&pow));
            cur = cur.and_then(|c| self.map.apply_loop(&c));
            pow = (&pow * &self.lambda).round_outward(BITS);
        }
        out
    }
}

/// Λ(Y, X∞) as an interval, from candidate ratios of attracting lengths.
pub fn homothety_factor(xl: &LimitLengthFunction, y: &MarkedGraph, opts: &LimitOptions) -> (Interval, Word) {
    let mut lo = Q::zero();
    let mut hi = Q::zero();
    let mut witness = Word::empty();
    for c in candidates(y) {
        let ly = y.translation_length(&c.word);
        if ly.is_zero() {
            continue;
        }
        let i = xl.attracting_length(&c.word, opts).interval;
        let (a, b) = (&i.lo / &ly, &i.hi / &ly);
        if a > lo {
            lo = a;
            witness = c.word.clone();
        }
        if b > hi {
            hi = b;
        }
    }
    (Interval::new(lo, hi), witness)
}

#[derive(Clone, Debug)]
pub struct HomothetyCase {
    pub g: Word,
    pub x: Interval,
    pub y: Interval,
    pub scaled: Interval,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct HomothetyReport {
    pub factor: Interval,
    pub witness: Word,
    pub cases: Vec<HomothetyCase>,
    pub ok: bool,
}

/// Checks ℓ_{X∞}(g) ∈ Λ(Y, X∞)·ℓ_{Y∞}(g) on each sampled g.
pub fn homothety_check(xl: &LimitLengthFunction, yl: &LimitLengthFunction, sample: &[Word], opts: &LimitOptions) -> HomothetyReport {
    let (factor, witness) = homothety_factor(xl, yl.point(), opts);
    let cases: Vec<HomothetyCase> = sample
        .iter()
        .map(|g| {
            let x = xl.attracting_length(g, opts).interval;
            let y = yl.attracting_length(g, opts).interval;
            let scaled = &y * &factor;
            let ok = x.overlaps(&scaled);
            HomothetyCase { g: g.clone(), x, y, scaled, ok }
        })
        .collect();
    let ok = cases.iter().all(|c| c.ok);
    HomothetyReport { factor, witness, cases, ok }
}

#[derive(Clone, Debug)]
pub struct TwistCase {
    pub twisted: Interval,
    pub scaled: Interval,
    pub ok: bool,
}

/// Compares ℓ_{X∞}(φ(g)) with λ·ℓ_{X∞}(g).
pub fn twist_check(xl: &LimitLengthFunction, g: &Word, opts: &LimitOptions) -> TwistCase {
    let pg = xl.map.phi.apply(g);
    let twisted = xl.attracting_length(&pg, opts).interval;
    let scaled = &xl.attracting_length(g, opts).interval * &xl.lambda;
    let ok = twisted.overlaps(&scaled);
    TwistCase { twisted, scaled, ok }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScanClass {
    /// Both enclosures contain 0; `exact` when both limits are certified to be 0.
    BothZero { exact: bool },
    /// The larger lower bound.
    Positive(Q),
    /// One limit is certified 0 while the other is certified positive.
    Violation,
}

impl ScanClass {
    pub fn label(&self) -> &'static str {
        match self {
            ScanClass::BothZero { .. } => "both-zero",
            ScanClass::Positive(_) => "positive",
            ScanClass::Violation => "violation",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScanEntry {
    pub g: Word,
    pub attracting: LimitLength,
    pub repelling: LimitLength,
    pub class: ScanClass,
}

#[derive(Clone, Debug)]
pub struct ScanReport {
    pub entries: Vec<ScanEntry>,
    pub epsilon: Option<Q>,
    pub violations: Vec<usize>,
    pub exact_zero: usize,
    pub inexact_zero: usize,
}

pub fn classify_pair(a: &LimitLength, b: &LimitLength) -> ScanClass {
    let (x, y) = (&a.interval, &b.interval);
    if (a.is_exact_zero() && y.lo.is_positive()) || (b.is_exact_zero() && x.lo.is_positive()) {
        return ScanClass::Violation;
    }
    if x.lo.is_positive() || y.lo.is_positive() {
        return ScanClass::Positive(x.lo.clone().max(y.lo.clone()));
    }
    ScanClass::BothZero { exact: a.is_exact_zero() && b.is_exact_zero() }
}

/// Dichotomy scan over cyclic words of letter length at most `cap`.
/// `xl` represents φ on X and `yl` represents φ⁻¹ on Y.
pub fn discreteness_scan(xl: &LimitLengthFunction, yl: &LimitLengthFunction, cap: usize, opts: &LimitOptions) -> ScanReport {
    let words = xl.point().fs().cyclic_words(cap);
    let mut entries = Vec::new();
    for g in words {
        let a = xl.decide(&g, opts);
        let b = yl.decide(&g, opts);
        let class = classify_pair(&a, &b);
        entries.push(ScanEntry { g, attracting: a, repelling: b, class });
    }
    discreteness_summary(entries)
}

pub fn discreteness_summary(entries: Vec<ScanEntry>) -> ScanReport {
    let mut epsilon: Option<Q> = None;
    let mut violations = Vec::new();
    let (mut exact_zero, mut inexact_zero) = (0, 0);
    for (i, e) in entries.iter().enumerate() {
        match &e.class {
            ScanClass::Positive(v) => {
                if epsilon.as_ref().map_or(true, |m| v < m) {
                    epsilon = Some(v.clone());
                }
            }
            ScanClass::BothZero { exact: true } => exact_zero += 1,
            ScanClass::BothZero { exact: false } => inexact_zero += 1,
            ScanClass::Violation => violations.push(i),
        }
    }
    ScanReport { entries, epsilon, violations, exact_zero, inexact_zero }
}
