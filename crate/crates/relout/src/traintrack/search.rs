//! Best-first search for a train-track representative over simplices.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_traits::{One, Zero};

use super::{build_map, is_train_track, GraphMap};
use crate::candidates::candidates;
use crate::error::{Error, Result};
use crate::freeprod::FPAutomorphism;
use crate::lipschitz::{min_displacement_on_simplex, CertifiedValue, SimplexMinimum};
use crate::marked_graph::MarkedGraph;
use crate::pf::{self, PfEnclosure};
use crate::rational::{q, round_down, Q};

#[derive(Clone, Debug)]
pub struct TrainTrackResult {
    pub map: GraphMap,
    pub pf: PfEnclosure,
    pub displacement: CertifiedValue,
    pub simplices: usize,
}

impl TrainTrackResult {
    pub fn point(&self) -> &MarkedGraph {
        &self.map.x
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub budget: usize,
    pub tol: Q,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { budget: 200, tol: q(1, 1_000_000_000_000) }
    }
}

/// Positive rational lengths close to `v`, summing to 1.
fn rounded_lengths(v: &[Q]) -> Option<Vec<Q>> {
    let r: Vec<Q> = v.iter().map(|x| round_down(x, 96)).collect();
    if r.iter().any(|x| x <= &Q::zero()) {
        return None;
    }
    let total: Q = r.iter().sum();
    Some(r.into_iter().map(|x| x / &total).collect())
}

/// Edges reachable from `e` through the transition digraph form an invariant subgraph.
fn invariant_closures(m: &pf::Matrix) -> Vec<Vec<usize>> {
    let n = m.len();
    (0..n)
        .map(|e| {
            let mut seen = vec![false; n];
            let mut stack = vec![e];
            seen[e] = true;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    if m[i][j] > 0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            (0..n).filter(|&j| seen[j]).collect()
        })
        .collect()
}

/// A candidate loop supported in a proper invariant subgraph, if any.
fn invariant_axis(f: &GraphMap) -> Option<(Vec<usize>, String)> {
    let m = f.transition_matrix();
    let fs = f.x.fs();
    let cands = candidates(&f.x);
    for sub in invariant_closures(&m) {
        if sub.len() == m.len() {
            continue;
        }
        let found = cands
            .iter()
            .find(|c| c.transition.iter().enumerate().all(|(e, &k)| k == 0 || sub.contains(&e)));
        if let Some(c) = found {
            return Some((sub, fs.format_word(&c.word)));
        }
    }
    None
}

pub(crate) fn try_simplex(x: &MarkedGraph, phi: &FPAutomorphism, min: &SimplexMinimum, tol: &Q, visited: usize) -> Result<Option<TrainTrackResult>> {
    if !min.interior {
        return Ok(None);
    }
    let y = x.with_lengths(min.minimizer.clone())?;
    let f = build_map(&y, phi);
    if !is_train_track(&f).ok {
        return Ok(None);
    }
    let m = f.transition_matrix();
    let enc = pf::pf_enclosure(&m, tol)?;
    let slack = tol * Q::from_integer(4.into());
    let widened = CertifiedValue { lower: &min.value.lower - &slack, upper: &min.value.upper + &slack, tol: tol.clone() };
    if !enc.lambda.overlaps(&widened.interval()) {
        return Ok(None);
    }
    if enc.lambda.contains(&Q::one()) && enc.lambda.hi <= Q::one() {
        // isometric: every metric in the simplex is a train-track point
        return Ok(Some(TrainTrackResult { map: f, pf: enc, displacement: min.value.clone(), simplices: visited }));
    }
    if !pf::is_irreducible(&m) {
        if let Some((sub, w)) = invariant_axis(&f) {
            return Err(Error::ReducibleDetected(format!("edges {sub:?} are invariant and carry {w}")));
        }
        return Ok(None);
    }
    let Some(lengths) = rounded_lengths(&enc.vector) else { return Ok(None) };
    let f = f.with_lengths(lengths)?;
    Ok(Some(TrainTrackResult { map: f, pf: enc, displacement: min.value.clone(), simplices: visited }))
}

/// Faces (single-edge collapses, flagged true) and cofaces (blow-ups), normalized.
pub fn neighbours(x: &MarkedGraph) -> Vec<(MarkedGraph, bool)> {
    let g = &*x.graph;
    let mut out = Vec::new();
    for e in 0..g.num_edges() {
        if let Ok(y) = x.collapse_forest(&[e]) {
            out.push((y.normalized(), true));
        }
    }
    let eps = x.min_edge() / Q::from_integer(4.into());
    for v in 0..g.num_vertices() {
        for b in x.blow_ups(v, &eps) {
            out.push((b.point.normalized(), false));
        }
    }
    out
}

/// Explores simplices in order of their minimal displacement, starting from `x0`.
pub fn find_train_track(x0: &MarkedGraph, phi: &FPAutomorphism, opts: &SearchOptions) -> Result<TrainTrackResult> {
    let mut seen: Vec<MarkedGraph> = vec![x0.normalized()];
    let mut mins: Vec<SimplexMinimum> = Vec::new();
    let mut heap: BinaryHeap<Reverse<(Q, usize)>> = BinaryHeap::new();
    let m0 = min_displacement_on_simplex(&seen[0], phi, &opts.tol)?;
    heap.push(Reverse((m0.value.lower.clone(), 0)));
    mins.push(m0);
    let mut popped = 0;
    while let Some(Reverse((_, i))) = heap.pop() {
        popped += 1;
        if popped > opts.budget {
            break;
        }
        let x = seen[i].clone();
        if let Some(r) = try_simplex(&x, phi, &mins[i], &opts.tol, popped)? {
            return Ok(r);
        }
        for (y, _) in neighbours(&x) {
            if seen.iter().any(|s| s.same_simplex(&y).is_some()) {
                continue;
            }
            let m = min_displacement_on_simplex(&y, phi, &opts.tol)?;
            heap.push(Reverse((m.value.lower.clone(), seen.len())));
            seen.push(y);
            mins.push(m);
        }
    }
    Err(Error::TrainTrackFailure(format!("{} simplices explored", popped.min(opts.budget))))
}
