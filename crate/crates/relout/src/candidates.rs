//! Candidate loops: embedded circles, figure eights, barbells and their degenerate forms.
//!
//! Shapes depend only on the underlying graph. A shape becomes loops by decorating every
//! passage through a group vertex with each element of its group; a passage that turns
//! back along the same edge needs a nontrivial element.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::Result;
use crate::freeprod::Word;
use crate::graph::{Graph, Loop, OEdge, Step};
use crate::marked_graph::MarkedGraph;

/// Hard stop on the number of decorated loops produced per simplex.
pub const MAX_LOOPS: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShapeKind {
    /// embedded circle
    O,
    /// two circles meeting in one vertex
    Figure8,
    /// two disjoint circles joined by an arc
    Barbell,
    /// circle with an arc to a group vertex
    DegenBarbell,
    /// arc between two group vertices
    DoubleDegenBarbell,
}

impl ShapeKind {
    pub fn label(self) -> &'static str {
        match self {
            ShapeKind::O => "O",
            ShapeKind::Figure8 => "8",
            ShapeKind::Barbell => "O-O",
            ShapeKind::DegenBarbell => "O-*",
            ShapeKind::DoubleDegenBarbell => "*-*",
        }
    }
}

/// A cyclic edge sequence of one of the five kinds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateShape {
    pub kind: ShapeKind,
    pub edges: Vec<OEdge>,
    pub transition: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub kind: ShapeKind,
    pub lp: Loop,
    pub word: Word,
    pub transition: Vec<u32>,
}

fn rotations_key(seq: &[OEdge]) -> Vec<OEdge> {
    let inv: Vec<OEdge> = seq.iter().rev().map(|e| e.inv()).collect();
    let mut best: Option<Vec<OEdge>> = None;
    for s in [seq.to_vec(), inv] {
        for r in 0..s.len() {
            let rot: Vec<OEdge> = s[r..].iter().chain(&s[..r]).copied().collect();
            if best.as_ref().map_or(true, |b| rot < *b) {
                best = Some(rot);
            }
        }
    }
    best.unwrap_or_default()
}

/// Simple cycles as oriented edge sequences, one per unoriented cycle.
pub fn simple_cycles(g: &Graph) -> Vec<Vec<OEdge>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for s in 0..g.num_vertices() {
        let mut path = Vec::new();
        let mut on = vec![false; g.num_vertices()];
        on[s] = true;
        cycle_dfs(g, s, s, &mut on, &mut path, &mut seen, &mut out);
    }
    out
}

fn out_edges(g: &Graph, v: usize) -> Vec<OEdge> {
    g.ends_at(v).into_iter().map(|d| d.leaving()).collect()
}

fn cycle_dfs(
    g: &Graph,
    s: usize,
    at: usize,
    on: &mut [bool],
    path: &mut Vec<OEdge>,
    seen: &mut BTreeSet<Vec<OEdge>>,
    out: &mut Vec<Vec<OEdge>>,
) {
    for oe in out_edges(g, at) {
        if path.iter().any(|p: &OEdge| p.edge() == oe.edge()) {
            continue;
        }
        let t = g.terminus(oe);
        if t == s {
            path.push(oe);
            if seen.insert(rotations_key(path)) {
                out.push(path.clone());
            }
            path.pop();
        } else if t > s && !on[t] {
            on[t] = true;
            path.push(oe);
            cycle_dfs(g, s, t, on, path, seen, out);
            path.pop();
            on[t] = false;
        }
    }
}

/// Embedded arcs from `from` to a vertex in `targets`, with interior avoiding `avoid`.
fn arcs(g: &Graph, from: usize, targets: &[bool], avoid: &[bool]) -> Vec<Vec<OEdge>> {
    let mut out = Vec::new();
    let mut on = vec![false; g.num_vertices()];
    on[from] = true;
    let mut path = Vec::new();
    arc_dfs(g, from, targets, avoid, &mut on, &mut path, &mut out);
    out
}

fn arc_dfs(
    g: &Graph,
    at: usize,
    targets: &[bool],
    avoid: &[bool],
    on: &mut [bool],
    path: &mut Vec<OEdge>,
    out: &mut Vec<Vec<OEdge>>,
) {
    for oe in out_edges(g, at) {
        let t = g.terminus(oe);
        if on[t] {
            continue;
        }
        if targets[t] {
            path.push(oe);
            out.push(path.clone());
            path.pop();
        } else if !avoid[t] {
            on[t] = true;
            path.push(oe);
            arc_dfs(g, t, targets, avoid, on, path, out);
            path.pop();
            on[t] = false;
        }
    }
}

fn cycle_vertices(g: &Graph, c: &[OEdge]) -> Vec<usize> {
    c.iter().map(|&e| g.origin(e)).collect()
}

/// The cycle rotated to start at `v`, which must lie on it.
fn rotate_to(g: &Graph, c: &[OEdge], v: usize) -> Vec<OEdge> {
    let i = c.iter().position(|&e| g.origin(e) == v).expect("vertex on cycle");
    c[i..].iter().chain(&c[..i]).copied().collect()
}

fn inv_seq(c: &[OEdge]) -> Vec<OEdge> {
    c.iter().rev().map(|e| e.inv()).collect()
}

fn mask(n: usize, vs: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in vs {
        m[v] = true;
    }
    m
}

pub fn enumerate_shapes(g: &Graph) -> Vec<CandidateShape> {
    let n = g.num_vertices();
    let cycles = simple_cycles(g);
    let vsets: Vec<Vec<usize>> = cycles.iter().map(|c| cycle_vertices(g, c)).collect();
    let mut seqs: Vec<(ShapeKind, Vec<OEdge>)> = Vec::new();
    for c in &cycles {
        seqs.push((ShapeKind::O, c.clone()));
    }
    for i in 0..cycles.len() {
        for j in i + 1..cycles.len() {
            let common: Vec<usize> = vsets[i].iter().copied().filter(|v| vsets[j].contains(v)).collect();
            let shares_edge = cycles[i].iter().any(|e| cycles[j].iter().any(|f| f.edge() == e.edge()));
            if common.len() == 1 && !shares_edge {
                let v = common[0];
                let a = rotate_to(g, &cycles[i], v);
                let b = rotate_to(g, &cycles[j], v);
                seqs.push((ShapeKind::Figure8, [a.clone(), b.clone()].concat()));
                seqs.push((ShapeKind::Figure8, [a, inv_seq(&b)].concat()));
            }
            if common.is_empty() {
                let avoid = mask(n, &[vsets[i].clone(), vsets[j].clone()].concat());
                let targets = mask(n, &vsets[j]);
                for &u in &vsets[i] {
                    for arc in arcs(g, u, &targets, &avoid) {
                        let w = g.terminus(*arc.last().unwrap());
                        let a = rotate_to(g, &cycles[i], u);
                        let b = rotate_to(g, &cycles[j], w);
                        let back = inv_seq(&arc);
                        seqs.push((ShapeKind::Barbell, [a.clone(), arc.clone(), b.clone(), back.clone()].concat()));
                        seqs.push((ShapeKind::Barbell, [a, arc, inv_seq(&b), back].concat()));
                    }
                }
            }
        }
    }
    let group_vertices: Vec<usize> = (0..n).filter(|&v| !g.is_free(v)).collect();
    for (i, c) in cycles.iter().enumerate() {
        for &w in &group_vertices {
            if vsets[i].contains(&w) {
                continue;
            }
            let avoid = mask(n, &vsets[i]);
            let targets = mask(n, &[w]);
            for &u in &vsets[i] {
                for arc in arcs(g, u, &targets, &avoid) {
                    let a = rotate_to(g, c, u);
                    let back = inv_seq(&arc);
                    seqs.push((ShapeKind::DegenBarbell, [a, arc, back].concat()));
                }
            }
        }
    }
    for (k, &u) in group_vertices.iter().enumerate() {
        for &w in &group_vertices[k + 1..] {
            let targets = mask(n, &[w]);
            let avoid = vec![false; n];
            for arc in arcs(g, u, &targets, &avoid) {
                let back = inv_seq(&arc);
                seqs.push((ShapeKind::DoubleDegenBarbell, [arc, back].concat()));
            }
        }
    }
    let mut seen = BTreeSet::new();
    seqs.into_iter()
        .filter(|(_, s)| seen.insert(rotations_key(s)))
        .map(|(kind, edges)| {
            let mut transition = vec![0u32; g.num_edges()];
            for e in &edges {
                transition[e.edge()] += 1;
            }
            CandidateShape { kind, edges, transition }
        })
        .collect()
}

/// Every decorated loop on every shape, deduplicated up to rotation and inversion.
pub fn candidate_loops(g: &Graph) -> Vec<(ShapeKind, Loop)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for shape in enumerate_shapes(g) {
        let e = &shape.edges;
        let len = e.len();
        let choices: Vec<Vec<usize>> = (0..len)
            .map(|i| {
                let v = g.terminus(e[i]);
                let back = e[(i + 1) % len] == e[i].inv();
                (0..g.order(v)).filter(|&h| !(back && h == 0)).collect()
            })
            .collect();
        let mut idx = vec![0usize; len];
        'outer: loop {
            let steps: Vec<Step> = (0..len).map(|i| Step { edge: e[i], dec: choices[i][idx[i]] }).collect();
            let lp = Loop { steps };
            if seen.insert(g.canonical_loop(&lp)) {
                out.push((shape.kind, lp));
                if out.len() >= MAX_LOOPS {
                    break 'outer;
                }
            }
            for k in 0..len {
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    continue 'outer;
                }
                idx[k] = 0;
            }
            break;
        }
    }
    out
}

/// Candidate elements of the simplex of `x`, read through its marking.
pub fn candidates(x: &MarkedGraph) -> Vec<Candidate> {
    candidate_loops(&x.graph)
        .into_iter()
        .map(|(kind, lp)| {
            let word = x.read_loop(&lp);
            let transition = x.graph.shape_of_steps(&lp.steps);
            Candidate { kind, lp, word, transition }
        })
        .collect()
}

pub fn candidate_elements(x: &MarkedGraph) -> Vec<Word> {
    candidates(x).into_iter().map(|c| c.word).collect()
}

/// Edge crossing counts of the axis of a hyperbolic element.
pub fn shape_vector(x: &MarkedGraph, g: &Word) -> Result<Vec<u32>> {
    let lp = x.loop_of(g)?;
    Ok(x.graph.shape_of_steps(&lp.steps))
}

/// Shape counts per kind, for reports.
pub fn shape_census(g: &Graph) -> BTreeMap<&'static str, usize> {
    let mut m = BTreeMap::new();
    for s in enumerate_shapes(g) {
        *m.entry(s.kind.label()).or_insert(0) += 1;
    }
    m
}
