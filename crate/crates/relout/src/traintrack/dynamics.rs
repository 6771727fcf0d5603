//! Bounded cancellation, legal growth, Nielsen paths, the iteration trichotomy and cylinders.

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use super::{GateStructure, GraphMap};
use crate::candidates::candidates;
use crate::error::{Error, Result};
use crate::freeprod::{FPAutomorphism, Word};
use crate::graph::{Loop, Path, Step};
use crate::lipschitz::stretch;
use crate::marked_graph::MarkedGraph;
use crate::pf::{self, Matrix};
use crate::rational::{qi, Q};

/// Lip(f)·vol(X) − vol(Xφ); the codomain has the same volume.
pub fn bcc_bound(f: &GraphMap) -> Q {
    let vol = f.x.volume();
    f.lip() * &vol - vol
}

/// A random reduced path with `len` steps (fewer if it gets stuck).
pub fn random_path<R: Rng>(x: &MarkedGraph, rng: &mut R, len: usize) -> Path {
    let g = &*x.graph;
    let start = rng.gen_range(0..g.num_vertices());
    let mut p = Path { start, init: rng.gen_range(0..g.order(start)), steps: vec![] };
    for _ in 0..len {
        let v = g.path_end(&p);
        let dec = p.final_dec();
        let outs: Vec<_> = g
            .ends_at(v)
            .into_iter()
            .map(|d| d.leaving())
            .filter(|&oe| dec != 0 || p.steps.last().map_or(true, |s| s.edge != oe.inv()))
            .collect();
        if outs.is_empty() {
            break;
        }
        let oe = outs[rng.gen_range(0..outs.len())];
        let w = g.terminus(oe);
        let d = rng.gen_range(0..g.order(w));
        p.steps.push(Step { edge: oe, dec: d });
    }
    // the last decoration is not part of the path's image
    if let Some(s) = p.steps.last_mut() {
        s.dec = 0;
    }
    p
}

/// Largest deviation of f(c) from [f(a), f(b)] over vertex cut points c of sampled paths.
pub fn bcc_measured<R: Rng>(f: &GraphMap, rng: &mut R, samples: usize, len: usize) -> Q {
    let g = &*f.x.graph;
    let mut best = Q::zero();
    for _ in 0..samples {
        let p = random_path(&f.x, rng, len);
        let whole = f.x.steps_length(&f.apply(&p).steps);
        for cut in 1..p.steps.len() {
            let (d1, d2) = split_at_vertex(g, &p, cut);
            let r1 = f.apply(&d1);
            let r2 = f.apply(&d2);
            let joined = g.reduce(&g.concat(&r1, &r2));
            debug_assert_eq!(f.x.steps_length(&joined.steps), whole);
            let dev = (f.x.steps_length(&r1.steps) + f.x.steps_length(&r2.steps) - &whole) / qi(2);
            if dev > best {
                best = dev;
            }
        }
    }
    best
}

/// p = first · second, cut after `cut` steps.
pub fn split_at_vertex(g: &crate::graph::Graph, p: &Path, cut: usize) -> (Path, Path) {
    let mut first = Path { start: p.start, init: p.init, steps: p.steps[..cut].to_vec() };
    let dec = first.steps[cut - 1].dec;
    first.steps[cut - 1].dec = 0;
    let mid = g.terminus(p.steps[cut - 1].edge);
    let second = Path { start: mid, init: dec, steps: p.steps[cut..].to_vec() };
    (first, second)
}

/// cc(f) = 2·BCC(f)/(Lip(f) − 1) with the bound in place of BCC.
pub fn critical_constant(f: &GraphMap) -> Result<Q> {
    let lip = f.lip();
    if lip <= qi(1) {
        return Err(Error::NotExpanding);
    }
    Ok(bcc_bound(f) * qi(2) / (lip - qi(1)))
}

pub fn count_illegal_turns(gates: &GateStructure, x: &MarkedGraph, p: &Path) -> usize {
    gates.illegal_turns(x, &p.steps, false).len()
}

/// Outcome of the growth check for one path.
#[derive(Clone, Debug)]
pub struct GrowCheck {
    pub legal: Q,
    pub lengths: Vec<Q>,
    /// Lower bound s^n·ℓ − 2B(s^n − 1)/(s − 1) for each n, with s the minimal stretch.
    pub bounds: Vec<Q>,
    pub holds: bool,
}

/// Legal segments of length ℓ survive n iterates with length at least s^n ℓ − 2B(s^n−1)/(s−1).
pub fn grow_check(f: &GraphMap, gates: &GateStructure, p: &Path, n: usize) -> GrowCheck {
    let s = f.stretches().into_iter().min().unwrap_or_else(Q::zero);
    let two_b = bcc_bound(f) * qi(2);
    let legal = gates.max_legal_subpath(&f.x, p);
    let mut cur = f.x.graph.reduce(p);
    let mut lengths = Vec::new();
    let mut bounds = Vec::new();
    let mut holds = true;
    let mut sk = Q::one();
    let mut geo = Q::zero();
    for _ in 0..n {
        cur = f.apply(&cur);
        geo += &sk;
        sk *= &s;
        let bound = &sk * &legal - &two_b * &geo;
        let len = f.x.steps_length(&cur.steps);
        // the surviving legal segment is part of the reduced image
        let surv = gates.max_legal_subpath(&f.x, &cur);
        holds &= surv >= bound;
        lengths.push(len);
        bounds.push(bound);
    }
    GrowCheck { legal, lengths, bounds, holds }
}

/// [f^{n+m}(p)] = g·[f^m(p)] in the universal cover.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NielsenCertificate {
    pub path: Path,
    pub n: usize,
    pub m: usize,
    pub translator: Word,
}

impl NielsenCertificate {
    pub fn kind(&self) -> &'static str {
        match (self.n, self.m) {
            (1, 0) => "Np",
            (_, 0) => "pNp",
            _ => "ppNp",
        }
    }
}

fn same_vertex(x: &MarkedGraph, a: &Path, b: &Path) -> bool {
    let g = &*x.graph;
    g.path_end(a) == g.path_end(b) && g.reduce(&g.concat(&g.inverse(a), b)).steps.is_empty()
}

fn tree_iterates(f: &GraphMap, p: &Path, n: usize) -> (Vec<Path>, Vec<Path>) {
    let g = &*f.x.graph;
    let a0 = f.tau[p.start].clone();
    let a1 = g.reduce(&g.concat(&a0, p));
    let mut b = vec![a0];
    let mut c = vec![a1];
    for k in 0..n {
        b.push(f.lift(&b[k]));
        c.push(f.lift(&c[k]));
    }
    (b, c)
}

fn translator(f: &GraphMap, b: &[Path], c: &[Path], n: usize, m: usize) -> Option<Word> {
    let g = &*f.x.graph;
    let (bm, bn) = (&b[m], &b[n + m]);
    let w = g.path_end(bm);
    if g.path_end(bn) != w || g.path_end(&c[m]) != g.path_end(&c[n + m]) {
        return None;
    }
    let seg = g.reduce(&g.concat(&g.inverse(bm), &c[m]));
    if seg.steps.is_empty() {
        return None;
    }
    for h in 0..g.order(w) {
        let mut q = bn.clone();
        g.push_dec(&mut q, h);
        let word = f.x.read_path(&g.concat(&q, &g.inverse(bm)));
        let moved = g.concat(&f.x.image(&word), &c[m]);
        if same_vertex(&f.x, &moved, &c[n + m]) {
            return Some(word);
        }
    }
    None
}

/// Smallest n + m ≤ `max` with [f^{n+m}(p)] a translate of [f^m(p)].
pub fn detect_ppnp(f: &GraphMap, p: &Path, max: usize) -> Option<NielsenCertificate> {
    let (b, c) = tree_iterates(f, p, max);
    for total in 1..=max {
        for m in 0..total {
            let n = total - m;
            if let Some(word) = translator(f, &b, &c, n, m) {
                let cert = NielsenCertificate { path: p.clone(), n, m, translator: word };
                debug_assert!(verify_nielsen(f, &cert));
                return Some(cert);
            }
        }
    }
    None
}

/// Recomputes both endpoints of the iterated lift.
pub fn verify_nielsen(f: &GraphMap, cert: &NielsenCertificate) -> bool {
    let g = &*f.x.graph;
    let (b, c) = tree_iterates(f, &cert.path, cert.n + cert.m);
    let img = f.x.image(&cert.translator);
    let (bm, cm) = (&b[cert.m], &c[cert.m]);
    let nontrivial = !g.reduce(&g.concat(&g.inverse(bm), cm)).steps.is_empty();
    nontrivial
        && same_vertex(&f.x, &g.concat(&img, bm), &b[cert.n + cert.m])
        && same_vertex(&f.x, &g.concat(&img, cm), &c[cert.n + cert.m])
}

/// The constants governing the iteration trichotomy, computed for one map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformConstants {
    pub pieces: usize,
    pub m0: BigUint,
    pub m: BigUint,
    pub q_m: usize,
    pub n0: BigUint,
    pub n: BigUint,
    pub big_m: BigUint,
}

fn canonical_piece(g: &crate::graph::Graph, steps: &[Step]) -> Vec<Step> {
    let mut fwd: Vec<Step> = steps.to_vec();
    if let Some(s) = fwd.last_mut() {
        s.dec = 0;
    }
    let p = Path { start: g.origin(steps[0].edge), init: 0, steps: fwd.clone() };
    let mut inv = g.inverse(&p).steps;
    if let Some(s) = inv.last_mut() {
        s.dec = 0;
    }
    fwd.min(inv)
}

/// Orbits of subpaths of edge images and of images of legal two-edge paths at free vertices.
pub fn pieces(f: &GraphMap, gates: &GateStructure) -> Vec<Vec<Step>> {
    let g = &*f.x.graph;
    let mut sources: Vec<Path> = f.edge_images.clone();
    for v in 0..g.num_vertices() {
        if !g.is_free(v) {
            continue;
        }
        for d1 in g.ends_at(v) {
            for d2 in g.ends_at(v) {
                let (inc, out) = (d1.leaving().inv(), d2.leaving());
                if d1 == d2 || !gates.turn_legal(&f.x, inc, 0, out) {
                    continue;
                }
                let p = Path { start: g.origin(inc), init: 0, steps: vec![Step { edge: inc, dec: 0 }, Step { edge: out, dec: 0 }] };
                sources.push(f.apply(&p));
            }
        }
    }
    let mut out: Vec<Vec<Step>> = Vec::new();
    for p in &sources {
        let n = p.steps.len();
        for i in 0..n {
            for j in i + 1..=n {
                out.push(canonical_piece(g, &p.steps[i..j]));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Turn orbits at non-free vertices: unordered pairs of germs up to the diagonal action.
fn nonfree_turn_orbits(f: &GraphMap) -> usize {
    let g = &*f.x.graph;
    let mut total = 0;
    for v in 0..g.num_vertices() {
        if g.is_free(v) {
            continue;
        }
        let k = g.ends_at(v).len();
        let o = g.order(v);
        // pairs (d1, 1), (d2, h) with (d1,1) != (d2,h), unordered
        total += (k * k * o - k) / 2 + k;
    }
    total
}

pub fn uniform_constants(f: &GraphMap, gates: &GateStructure) -> UniformConstants {
    let pieces = pieces(f, gates).len();
    let m0 = BigUint::from(pieces + 1);
    let m = {
        let t = &m0 * &m0 + &m0;
        &t * &t
    };
    // every turn orbit at a non-free vertex is counted, an upper bound for Q_m
    let q_m = nonfree_turn_orbits(f);
    let q2 = BigUint::from(q_m + 2);
    let n0 = &m * &q2 * &q2 + BigUint::one();
    let n = &m * &n0;
    let big_m = BigUint::from(5u32) * &n * &n + &n;
    UniformConstants { pieces, m0, m, q_m, n0, n, big_m }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Trichotomy {
    FewerIllegal { n: usize },
    LongLegal { n: usize },
    PpnpSplitting { pieces: Vec<NielsenCertificate> },
    Inconclusive,
}

impl Trichotomy {
    pub fn label(&self) -> &'static str {
        match self {
            Trichotomy::FewerIllegal { .. } => "FEWER_ILLEGAL",
            Trichotomy::LongLegal { .. } => "LONG_LEGAL",
            Trichotomy::PpnpSplitting { .. } => "PPNP_SPLITTING",
            Trichotomy::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// Splits p at vertices into pieces with at most one illegal turn, each a ppNp, with legal junctions.
pub fn ppnp_splitting(f: &GraphMap, gates: &GateStructure, p: &Path, max: usize) -> Option<Vec<NielsenCertificate>> {
    let g = &*f.x.graph;
    let n = p.steps.len();
    if n == 0 {
        return None;
    }
    let bad = gates.illegal_turns(&f.x, &p.steps, false);
    // reach[j] = certificates for a splitting of the first j steps
    let mut reach: Vec<Option<Vec<NielsenCertificate>>> = vec![None; n + 1];
    reach[0] = Some(vec![]);
    for i in 0..n {
        let Some(prefix) = reach[i].clone() else { continue };
        if i > 0 && bad.contains(&(i - 1)) {
            continue;
        }
        for j in i + 1..=n {
            let inner = bad.iter().filter(|&&b| b >= i && b + 1 < j).count();
            if inner > 1 {
                break;
            }
            if reach[j].is_some() {
                continue;
            }
            let piece = subpath(g, p, i, j);
            if let Some(c) = detect_ppnp(f, &piece, max) {
                let mut v = prefix.clone();
                v.push(c);
                reach[j] = Some(v);
            }
        }
    }
    reach[n].take()
}

fn subpath(g: &crate::graph::Graph, p: &Path, i: usize, j: usize) -> Path {
    let start = if i == 0 { p.start } else { g.terminus(p.steps[i - 1].edge) };
    let init = if i == 0 { p.init } else { p.steps[i - 1].dec };
    let mut steps = p.steps[i..j].to_vec();
    if let Some(s) = steps.last_mut() {
        s.dec = 0;
    }
    Path { start, init, steps }
}

/// Iterates p until the illegal-turn count drops or a legal subpath longer than `c` appears;
/// otherwise tries a splitting into ppNps.
pub fn trichotomy(f: &GraphMap, gates: &GateStructure, p: &Path, c: &Q, cap: usize) -> Result<Trichotomy> {
    if f.lip() <= qi(1) {
        return Err(Error::NotExpanding);
    }
    let x = &f.x;
    let p = x.graph.reduce(p);
    let k0 = count_illegal_turns(gates, x, &p);
    if gates.max_legal_subpath(x, &p) > *c {
        return Ok(Trichotomy::LongLegal { n: 0 });
    }
    let mut cur = p.clone();
    for n in 1..=cap {
        cur = f.apply(&cur);
        if count_illegal_turns(gates, x, &cur) < k0 {
            return Ok(Trichotomy::FewerIllegal { n });
        }
        if gates.max_legal_subpath(x, &cur) > *c {
            return Ok(Trichotomy::LongLegal { n });
        }
    }
    Ok(match ppnp_splitting(f, gates, &p, cap) {
        Some(pieces) => Trichotomy::PpnpSplitting { pieces },
        None => Trichotomy::Inconclusive,
    })
}

/// Report of one evaluation of the legal-subpath implication.
#[derive(Clone, Debug)]
pub struct RatioCheck {
    pub ratio: Q,
    pub threshold: Q,
    pub antecedent: bool,
    /// Longest f_Y-legal segment of the Y-axis of g; None when the whole axis is legal.
    pub legal: Option<Q>,
    pub consequent: bool,
    pub holds: bool,
}

/// If ℓ_X(φⁿg)/ℓ_X(g) < 1/D′ then the Y-axis of g has an f_Y-legal subpath of length ≥ C₁,
/// with D′ = (C₁/a_Y + 1)·Λ(X,Y)·Λ(Y,X) and f_Y a train track for φ⁻¹ on Y.
pub fn ratio_legal_check(
    fy: &GraphMap,
    gates: &GateStructure,
    x: &MarkedGraph,
    phi: &FPAutomorphism,
    g: &Word,
    n: usize,
    c1: &Q,
) -> Result<RatioCheck> {
    let y = &fy.x;
    let d = c1 / y.min_edge() + qi(1);
    let dp = d * stretch(x, y) * stretch(y, x);
    let lx = x.translation_length(g);
    if !lx.is_positive() {
        return Err(Error::EllipticElement);
    }
    let ratio = x.translation_length(&phi.pow(n as i64).apply(g)) / lx;
    let threshold = Q::one() / dp;
    let antecedent = ratio < threshold;
    let lp = y.loop_of(g)?;
    let legal = gates.max_legal_in_loop(y, &lp);
    let consequent = legal.as_ref().map_or(true, |l| l >= c1);
    Ok(RatioCheck { ratio, threshold, antecedent, legal, consequent, holds: !antecedent || consequent })
}

/// Edge classes permuted by f, with the power making each diagonal block positive.
#[derive(Clone, Debug)]
pub struct Cylinders {
    pub period: usize,
    pub blocks: Vec<Vec<usize>>,
    /// f maps the edges of block i into block `next[i]`.
    pub next: Vec<usize>,
    pub positive_power: usize,
    /// A hyperbolic element carried by each block.
    pub witnesses: Vec<Option<Word>>,
}

pub fn cylinder_decomposition(f: &GraphMap) -> Result<Cylinders> {
    let m: Matrix = f.transition_matrix();
    let (d, class) = pf::period(&m)?;
    let blocks: Vec<Vec<usize>> = (0..d).map(|c| (0..m.len()).filter(|&i| class[i] == c).collect()).collect();
    let next: Vec<usize> = (0..d)
        .map(|c| {
            let i = blocks[c][0];
            let j = (0..m.len()).find(|&j| m[i][j] > 0).expect("irreducible rows are nonzero");
            class[j]
        })
        .collect();
    let n = m.len();
    let bound = (n - 1) * (n - 1) + 1;
    let mut s = d;
    let positive_power = loop {
        let p = pf::mat_pow(&m, s as u32);
        if blocks.iter().all(|b| b.iter().all(|&i| b.iter().all(|&j| p[i][j] > 0))) {
            break s;
        }
        s += d;
        if s > bound * d {
            return Err(Error::ReducibleMatrix);
        }
    };
    let cands = candidates(&f.x);
    let witnesses = blocks
        .iter()
        .map(|b| {
            cands
                .iter()
                .find(|c| c.transition.iter().enumerate().all(|(e, &k)| k == 0 || b.contains(&e)))
                .map(|c| c.word.clone())
        })
        .collect();
    Ok(Cylinders { period: d, blocks, next, positive_power, witnesses })
}

/// Lengths of a loop under iteration; stops early if the loop becomes elliptic.
pub fn iterate_loop_lengths(f: &GraphMap, l: &Loop, n: usize) -> Vec<Q> {
    let mut out = Vec::new();
    let mut cur = l.clone();
    for _ in 0..n {
        match f.apply_loop(&cur) {
            Some(next) => {
                out.push(f.x.steps_length(&next.steps));
                cur = next;
            }
            None => {
                out.push(Q::zero());
                break;
            }
        }
    }
    out
}
