//! Exploration of the minimally displaced set, its quotient by ⟨φ⟩, and the displacement spectrum.

use std::collections::{HashMap, VecDeque};

use num_traits::One;

use crate::candidates::candidates;
use crate::error::{Error, Result};
use crate::freeprod::{FPAutomorphism, Syllable};
use crate::lipschitz::{min_displacement_on_simplex, sym_distance, CertifiedValue, SimplexDisplacement};
use crate::marked_graph::MarkedGraph;
use crate::pf::pf_enclosure;
use crate::rational::{q, Interval, Q};
use crate::traintrack::search::{neighbours, try_simplex};
use crate::traintrack::{find_train_track, SearchOptions, TrainTrackResult};

/// λ(φ) as the PF value of a train-track representative found from `x0`.
pub fn lambda_min(x0: &MarkedGraph, phi: &FPAutomorphism, opts: &SearchOptions) -> Result<(Interval, TrainTrackResult)> {
    let tt = find_train_track(x0, phi, opts)?;
    Ok((tt.pf.lambda.clone(), tt))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimplexStatus {
    /// Carries a train-track point, hence a point of displacement λ(φ).
    Min,
    /// λ_φ(Δ) > λ(φ), certified by separated enclosures.
    Above,
    /// Infimum λ(φ) approached only towards a face: the sublevel margin shrinks with the tolerance.
    FaceLimit { margins: (Q, Q) },
    Unresolved,
}

impl SimplexStatus {
    pub fn label(&self) -> &'static str {
        match self {
            SimplexStatus::Min => "min",
            SimplexStatus::Above => "above",
            SimplexStatus::FaceLimit { .. } => "face-limit",
            SimplexStatus::Unresolved => "unresolved",
        }
    }
}

#[derive(Clone, Debug)]
pub struct AtlasSimplex {
    /// A train-track point for Min simplices, otherwise a point near the minimizer.
    pub point: MarkedGraph,
    pub value: CertifiedValue,
    pub status: SimplexStatus,
    pub orbit: usize,
    /// This simplex is `identified.0`·φ^`identified.1`.
    pub identified: Option<(usize, i64)>,
    pub tt: Option<TrainTrackResult>,
}

#[derive(Clone, Debug)]
pub struct ExploreOptions {
    pub max_simplices: usize,
    pub max_power: i64,
    pub tol: Q,
    pub search: SearchOptions,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions { max_simplices: 10_000, max_power: 4, tol: q(1, 1_000_000_000_000), search: SearchOptions::default() }
    }
}

#[derive(Clone, Debug)]
pub struct MinSetAtlas {
    pub lambda: Interval,
    pub simplices: Vec<AtlasSimplex>,
    /// (face, coface) pairs.
    pub adjacency: Vec<(usize, usize)>,
    pub fundamental_domain: Vec<usize>,
    pub frontier: Vec<usize>,
    pub complete: bool,
}

type SimplexKey = Vec<Vec<Syllable>>;

/// Conjugacy classes of the candidates of a simplex; equal for equal marked simplices.
fn simplex_key(x: &MarkedGraph) -> SimplexKey {
    let fs = x.fs();
    let mut k: Vec<Vec<Syllable>> = candidates(x).iter().map(|c| fs.class_key(&c.word)).collect();
    k.sort();
    k.dedup();
    k
}

/// Orbit bookkeeping: keys of Δ·φ^k for every registered simplex and |k| ≤ K.
struct OrbitIndex {
    keys: HashMap<SimplexKey, Vec<(usize, i64)>>,
    twisted: Vec<Vec<(i64, MarkedGraph)>>,
    powers: Vec<(i64, FPAutomorphism)>,
}

impl OrbitIndex {
    fn new(phi: &FPAutomorphism, max_power: i64) -> Self {
        let powers = (-max_power..=max_power).map(|k| (k, phi.pow(k))).collect();
        OrbitIndex { keys: HashMap::new(), twisted: Vec::new(), powers }
    }

    fn register(&mut self, idx: usize, x: &MarkedGraph) {
        let mut tw = Vec::new();
        for (k, p) in &self.powers {
            let y = x.twist(p);
            self.keys.entry(simplex_key(&y)).or_default().push((idx, *k));
            tw.push((*k, y));
        }
        debug_assert_eq!(self.twisted.len(), idx);
        self.twisted.push(tw);
    }

    /// Some (i, k) with y in the simplex of simplices[i]·φ^k, preferring small |k|.
    fn find(&self, y: &MarkedGraph) -> Option<(usize, i64)> {
        let mut hits = self.keys.get(&simplex_key(y))?.clone();
        hits.sort_by_key(|&(i, k)| (k.abs(), i));
        hits.into_iter().find(|&(i, k)| {
            self.twisted[i].iter().any(|(kk, t)| *kk == k && t.same_simplex(y).is_some())
        })
    }
}

fn margin_at(sd: &SimplexDisplacement, v: &CertifiedValue) -> Q {
    sd.margin(&v.upper).map(|(m, _)| m).unwrap_or_else(|| q(0, 1))
}

/// Decides the status of the simplex of `y` relative to the enclosure `lambda`.
pub fn classify(y: &MarkedGraph, phi: &FPAutomorphism, lambda: &Interval, tol: &Q) -> Result<(AtlasSimplex, bool)> {
    let sd = SimplexDisplacement::new(y, phi);
    let m = sd.minimize(tol)?;
    let mk = |status, point, tt| AtlasSimplex { point, value: m.value.clone(), status, orbit: 0, identified: None, tt };
    if m.value.lower > lambda.hi {
        let pt = if m.interior { y.with_lengths(m.minimizer.clone()).unwrap_or_else(|_| y.clone()) } else { y.clone() };
        return Ok((mk(SimplexStatus::Above, pt, None), false));
    }
    if let Some(tt) = try_simplex(y, phi, &m, tol, 1)? {
        if tt.pf.lambda.overlaps(lambda) {
            return Ok((mk(SimplexStatus::Min, tt.point().clone(), Some(tt)), true));
        }
    }
    let finer = tol * q(1, 1_000_000);
    let m2 = sd.minimize(&finer)?;
    if m2.value.lower > lambda.hi {
        let s = AtlasSimplex { point: y.clone(), value: m2.value, status: SimplexStatus::Above, orbit: 0, identified: None, tt: None };
        return Ok((s, false));
    }
    let (a, b) = (margin_at(&sd, &m.value), margin_at(&sd, &m2.value));
    let shrinking = !m2.interior || &b * Q::from_integer(100.into()) <= a;
    let status = if shrinking { SimplexStatus::FaceLimit { margins: (a, b) } } else { SimplexStatus::Unresolved };
    Ok((AtlasSimplex { point: y.clone(), value: m2.value, status, orbit: 0, identified: None, tt: None }, false))
}

/// Breadth-first exploration of Min simplices from a train-track point, modulo φ^k, |k| ≤ K.
pub fn explore(phi: &FPAutomorphism, tt: &TrainTrackResult, opts: &ExploreOptions) -> Result<MinSetAtlas> {
    let lambda = pf_enclosure(&tt.map.transition_matrix(), &q(1, 10).pow(30))?.lambda;
    if lambda.lo <= Q::one() {
        return Err(Error::Hypothesis("λ(φ) enclosure meets 1; the co-compactness statement needs λ(φ) > 1".into()));
    }
    let x0 = tt.point().clone();
    let first = AtlasSimplex {
        point: x0.clone(),
        value: min_displacement_on_simplex(&x0, phi, &opts.tol)?.value,
        status: SimplexStatus::Min,
        orbit: 0,
        identified: None,
        tt: Some(tt.clone()),
    };
    let mut sims = vec![first];
    let mut index = OrbitIndex::new(phi, opts.max_power);
    index.register(0, &x0);
    let mut adjacency: Vec<(usize, usize)> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::from([0]);
    let mut orbits = 1;
    let mut complete = true;
    while let Some(i) = queue.pop_front() {
        let x = sims[i].point.clone();
        for (y, is_face) in neighbours(&x) {
            let j = match index.find(&y) {
                Some((j, 0)) => j,
                found => {
                    if sims.len() >= opts.max_simplices {
                        complete = false;
                        break;
                    }
                    let (mut s, is_min) = classify(&y, phi, &lambda, &opts.tol)?;
                    let j = sims.len();
                    match found {
                        Some((o, k)) => {
                            s.orbit = sims[o].orbit;
                            s.identified = Some((o, k));
                        }
                        None => {
                            s.orbit = orbits;
                            orbits += 1;
                            if is_min {
                                queue.push_back(j);
                            }
                        }
                    }
                    let pt = s.point.clone();
                    sims.push(s);
                    index.register(j, &pt);
                    j
                }
            };
            let pair = if is_face { (j, i) } else { (i, j) };
            if !adjacency.contains(&pair) {
                adjacency.push(pair);
            }
        }
        if !complete {
            break;
        }
    }
    // One ring around identified Min translates; statuses follow by equivariance.
    let ring: Vec<usize> = (0..sims.len()).filter(|&i| sims[i].status == SimplexStatus::Min && sims[i].identified.is_some()).collect();
    for i in ring {
        if !complete {
            break;
        }
        let x = sims[i].point.clone();
        for (y, is_face) in neighbours(&x) {
            let j = match index.find(&y) {
                Some((j, 0)) => j,
                Some((o, k)) if sims[o].status == SimplexStatus::Min && sims.len() < opts.max_simplices => {
                    let mut s = sims[o].clone();
                    s.point = y.clone();
                    s.tt = None;
                    s.identified = Some((o, k));
                    let j = sims.len();
                    sims.push(s);
                    index.register(j, &y);
                    j
                }
                _ => continue,
            };
            let pair = if is_face { (j, i) } else { (i, j) };
            if !adjacency.contains(&pair) {
                adjacency.push(pair);
            }
        }
    }
    let fundamental_domain = (0..sims.len()).filter(|&i| sims[i].status == SimplexStatus::Min && sims[i].identified.is_none()).collect();
    let frontier = (0..sims.len())
        .filter(|&i| sims[i].status != SimplexStatus::Min || sims[i].identified.is_some())
        .collect::<Vec<_>>();
    if sims.iter().any(|s| s.status == SimplexStatus::Unresolved) {
        complete = false;
    }
    Ok(MinSetAtlas { lambda, simplices: sims, adjacency, fundamental_domain, frontier, complete })
}

impl MinSetAtlas {
    pub fn num_orbits(&self) -> usize {
        let mut o: Vec<usize> = self.fundamental_domain.iter().map(|&i| self.simplices[i].orbit).collect();
        o.sort();
        o.dedup();
        o.len()
    }

    /// Atlas simplex containing x.
    pub fn locate(&self, x: &MarkedGraph) -> Option<usize> {
        self.simplices.iter().position(|s| s.point.same_simplex(x).is_some())
    }

    fn is_face_of(&self, a: usize, b: usize) -> bool {
        a == b || self.adjacency.contains(&(a, b))
    }

    /// Simplices from the one containing x to the one containing y, through Min simplices.
    pub fn simplex_path(&self, x: &MarkedGraph, y: &MarkedGraph) -> Result<Vec<usize>> {
        let s = self.locate(x).ok_or(Error::NotInAtlas)?;
        let t = self.locate(y).ok_or(Error::NotInAtlas)?;
        let n = self.simplices.len();
        let mut prev = vec![usize::MAX; n];
        prev[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(i) = queue.pop_front() {
            if i == t {
                break;
            }
            for &(a, b) in &self.adjacency {
                let j = if a == i { b } else if b == i { a } else { continue };
                let inside = self.simplices[j].status == SimplexStatus::Min || j == t;
                if prev[j] == usize::MAX && inside {
                    prev[j] = i;
                    queue.push_back(j);
                }
            }
        }
        if prev[t] == usize::MAX {
            return Err(Error::NotInAtlas);
        }
        let mut path = vec![t];
        while *path.last().unwrap() != s {
            let p = prev[*path.last().unwrap()];
            path.push(p);
        }
        path.reverse();
        Ok(path)
    }

    /// Number of steps of a point sequence from x to y with consecutive points in a common closed simplex.
    pub fn simplicial_length(&self, x: &MarkedGraph, y: &MarkedGraph) -> Result<usize> {
        if x.points_equal(y).is_some() {
            return Ok(0);
        }
        let path = self.simplex_path(x, y)?;
        let mut steps = 0;
        let mut i = 0;
        let last = path.len() - 1;
        if last == 0 {
            return Ok(1);
        }
        while i < last {
            // farthest j such that path[i..=j] all lie in the closure of one of them
            let mut best = i + 1;
            for j in (i + 1..=last).rev() {
                let covered = (i..=j).any(|k| (i..=j).all(|l| self.is_face_of(path[l], path[k])));
                if covered {
                    best = j;
                    break;
                }
            }
            steps += 1;
            i = best;
        }
        Ok(steps)
    }
}

/// One value of the displacement spectrum with the orbit representatives realizing it.
#[derive(Clone, Debug)]
pub struct SpectrumValue {
    pub value: CertifiedValue,
    pub simplices: usize,
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<SpectrumValue>,
    pub explored: usize,
    pub complete: bool,
}

/// Orbit representatives of simplices with λ_φ(Δ) ≤ c reachable from the atlas, grouped by value.
pub fn spectrum(phi: &FPAutomorphism, c: &Q, atlas: &MinSetAtlas, opts: &ExploreOptions) -> Result<Spectrum> {
    let mut index = OrbitIndex::new(phi, opts.max_power);
    let mut reps: Vec<(MarkedGraph, CertifiedValue)> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    let mut complete = true;
    let mut registered = 0usize;
    for s in &atlas.simplices {
        if index.find(&s.point).is_some() {
            continue;
        }
        index.register(registered, &s.point);
        registered += 1;
        if s.value.lower <= *c {
            queue.push_back(reps.len());
            reps.push((s.point.clone(), s.value.clone()));
        }
    }
    while let Some(i) = queue.pop_front() {
        let x = reps[i].0.clone();
        for (y, _) in neighbours(&x) {
            if index.find(&y).is_some() {
                continue;
            }
            if registered >= opts.max_simplices {
                complete = false;
                break;
            }
            index.register(registered, &y);
            registered += 1;
            let v = min_displacement_on_simplex(&y, phi, &opts.tol)?.value;
            if v.lower <= *c {
                queue.push_back(reps.len());
                reps.push((y, v));
            }
        }
        if !complete {
            break;
        }
    }
    // refine overlapping enclosures, then merge those that still overlap
    let fine = q(1, 10).pow(30);
    let mut vals: Vec<CertifiedValue> = reps.iter().map(|(_, v)| v.clone()).collect();
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].lower.cmp(&vals[b].lower));
    for w in 0..order.len() {
        for u in w + 1..order.len() {
            let (a, b) = (order[w], order[u]);
            if vals[a].interval().overlaps(&vals[b].interval()) {
                for k in [a, b] {
                    if vals[k].width() > fine {
                        vals[k] = min_displacement_on_simplex(&reps[k].0, phi, &fine)?.value;
                    }
                }
            }
        }
    }
    order.sort_by(|&a, &b| vals[a].lower.cmp(&vals[b].lower));
    let mut values: Vec<SpectrumValue> = Vec::new();
    for i in order {
        let v = &vals[i];
        if v.lower > *c {
            continue;
        }
        match values.last_mut() {
            Some(last) if last.value.interval().overlaps(&v.interval()) => {
                last.value = CertifiedValue {
                    lower: last.value.lower.clone().max(v.lower.clone()),
                    upper: last.value.upper.clone().min(v.upper.clone()),
                    tol: last.value.tol.clone(),
                };
                last.simplices += 1;
            }
            _ => values.push(SpectrumValue { value: v.clone(), simplices: 1 }),
        }
    }
    Ok(Spectrum { values, explored: registered, complete })
}

/// A train-track point for φ⁻¹ reached from x, with D = Λ(X,Y)·Λ(Y,X).
pub fn distance_to_inverse_minset(x: &MarkedGraph, phi: &FPAutomorphism, opts: &SearchOptions) -> Result<(TrainTrackResult, Q)> {
    let inv = phi.invert();
    let tt = find_train_track(x, &inv, opts)?;
    let d = sym_distance(x, tt.point());
    Ok((tt, d))
}
