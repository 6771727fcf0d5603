//! Graph maps representing automorphisms, gate structures and train-track checks.
//!
//! A map f: X -> X representing φ is stored through its lift to the Bass-Serre tree.
//! Tree vertices are decorated paths from the base. With τ_v the spanning-tree path to v
//! and P_v = f(τ_v), the lift is f(A) = [m(φ(ρ(A τ_w⁻¹))) P_w] for A ending at w.

pub mod dynamics;
pub mod search;

use num_traits::Zero;

use crate::candidates::candidates;
use crate::error::{Error, Result};
use crate::freeprod::FPAutomorphism;
use crate::graph::{Core, End, Graph, Loop, OEdge, Path, Step};
use crate::marked_graph::MarkedGraph;
use crate::pf::Matrix;
use crate::rational::{qi, Q};

pub use dynamics::*;
pub use search::*;

#[derive(Clone, Debug)]
pub struct GraphMap {
    pub x: MarkedGraph,
    pub phi: FPAutomorphism,
    tau: Vec<Path>,
    /// P_v, the image of the tree vertex τ_v, as a path from the base.
    pub vertex_paths: Vec<Path>,
    pub vertex_map: Vec<usize>,
    /// f(e) as a reduced path from f(o(e)) to f(t(e)).
    pub edge_images: Vec<Path>,
}

impl GraphMap {
    /// Map with prescribed vertex images; group vertices must go to fixed vertices.
    pub fn with_vertex_paths(x: &MarkedGraph, phi: &FPAutomorphism, vertex_paths: Vec<Path>) -> Result<Self> {
        let g = &*x.graph;
        let (_, tau) = g.spanning_tree(x.base);
        if vertex_paths.len() != g.num_vertices() {
            return Err(Error::InvalidGraph("one vertex image per vertex".into()));
        }
        for (v, p) in vertex_paths.iter().enumerate() {
            if p.start != x.base {
                return Err(Error::InvalidGraph("vertex images start at the base".into()));
            }
            for h in 1..g.order(v) {
                let stab = x.read_path(&g.concat(&g.concat(&tau[v], &Path { start: v, init: h, steps: vec![] }), &g.inverse(&tau[v])));
                let img = x.image(&phi.apply(&stab));
                let moved = g.reduce(&g.concat(&g.concat(&g.inverse(p), &img), p));
                if !moved.steps.is_empty() {
                    return Err(Error::InvalidGraph(format!("vertex {v} must map to the fixed vertex of its image group")));
                }
            }
        }
        let vertex_map = vertex_paths.iter().map(|p| g.path_end(p)).collect();
        let mut f = GraphMap { x: x.clone(), phi: phi.clone(), tau, vertex_paths, vertex_map, edge_images: vec![] };
        f.edge_images = (0..g.num_edges())
            .map(|e| f.apply(&Path { start: g.edges[e].from, init: 0, steps: vec![Step { edge: OEdge::new(e, false), dec: 0 }] }))
            .collect();
        Ok(f)
    }

    /// Image of the tree vertex represented by a path `a` from the base.
    pub fn lift(&self, a: &Path) -> Path {
        let g = &*self.x.graph;
        let w = g.path_end(a);
        let loop_ = g.concat(a, &g.inverse(&self.tau[w]));
        let word = self.phi.apply(&self.x.read_path(&loop_));
        g.reduce(&g.concat(&self.x.image(&word), &self.vertex_paths[w]))
    }

    /// [f(q)] for a path q from u to w, as a path from f(u) to f(w).
    pub fn apply(&self, q: &Path) -> Path {
        let g = &*self.x.graph;
        let a = g.concat(&self.tau[q.start], q);
        g.reduce(&g.concat(&g.inverse(&self.vertex_paths[q.start]), &self.lift(&a)))
    }

    pub fn iterate(&self, q: &Path, n: usize) -> Path {
        let mut p = self.x.graph.reduce(q);
        for _ in 0..n {
            p = self.apply(&p);
        }
        p
    }

    /// Cyclically reduced image of a loop; None when the image is elliptic.
    pub fn apply_loop(&self, l: &Loop) -> Option<Loop> {
        let g = &*self.x.graph;
        match g.cyclic_core(&self.apply(&g.loop_as_path(l))).1 {
            Core::Hyperbolic(l) => Some(l),
            Core::Elliptic { .. } => None,
        }
    }

    pub fn iterate_loop(&self, l: &Loop, n: usize) -> Option<Loop> {
        let mut cur = l.clone();
        for _ in 0..n {
            cur = self.apply_loop(&cur)?;
        }
        Some(cur)
    }

    /// The map f^n, representing φ^n.
    pub fn power(&self, n: usize) -> GraphMap {
        let mut paths: Vec<Path> = self.tau.clone();
        for _ in 0..n {
            paths = paths.iter().map(|a| self.lift(a)).collect();
        }
        let phin = self.phi.pow(n as i64);
        GraphMap::with_vertex_paths(&self.x, &phin, paths).expect("powers of a map are maps")
    }

    /// Same combinatorial map on another metric of the simplex.
    pub fn with_lengths(&self, lengths: Vec<Q>) -> Result<GraphMap> {
        let mut f = self.clone();
        f.x = self.x.with_lengths(lengths)?;
        Ok(f)
    }

    pub fn stretches(&self) -> Vec<Q> {
        self.edge_images
            .iter()
            .enumerate()
            .map(|(e, p)| self.x.steps_length(&p.steps) / &self.x.lengths[e])
            .collect()
    }

    pub fn lip(&self) -> Q {
        self.stretches().into_iter().max().unwrap_or_else(Q::zero)
    }

    /// Maximally stretched edges.
    pub fn tension_graph(&self) -> Vec<usize> {
        let s = self.stretches();
        let m = s.iter().max().cloned().unwrap_or_else(Q::zero);
        (0..s.len()).filter(|&e| s[e] == m).collect()
    }

    /// Row i counts the crossings of each edge by f(e_i).
    pub fn transition_matrix(&self) -> Matrix {
        self.edge_images
            .iter()
            .map(|p| self.x.graph.shape_of_steps(&p.steps).into_iter().map(u64::from).collect())
            .collect()
    }

    /// The induced map on the group at the base vertex is exactly φ.
    pub fn verify(&self) -> bool {
        let g = &*self.x.graph;
        let fs = self.x.fs();
        let pb = &self.vertex_paths[self.x.base];
        fs.generators().into_iter().all(|gen| {
            let img = self.apply(&self.x.image(&gen));
            self.x.read_path(&g.concat(&g.concat(pb, &img), &g.inverse(pb))) == self.phi.apply(&gen)
        })
    }

    pub fn germs(&self) -> GermSet {
        GermSet::new(&self.x)
    }

    /// Image of the germ (end, k) at v, or None if that edge collapses.
    pub fn germ_image(&self, gs: &GermSet, germ: usize) -> Option<usize> {
        let (v, end, k) = gs.germs[germ];
        let q = Path { start: v, init: k, steps: vec![Step { edge: end.leaving(), dec: 0 }] };
        let r = self.apply(&q);
        let first = r.steps.first()?;
        Some(gs.index(g_end(first.edge), r.init, &self.x))
    }
}

fn g_end(oe: OEdge) -> End {
    oe.start_end()
}

/// Germs (edge end at v, element of G_v) in a fixed frame at each vertex.
#[derive(Clone, Debug)]
pub struct GermSet {
    pub germs: Vec<(usize, End, usize)>,
    /// index of (end, k): offset[end.index()] + k
    offset: Vec<usize>,
}

impl GermSet {
    pub fn new(x: &MarkedGraph) -> Self {
        let g = &*x.graph;
        let mut germs = Vec::new();
        let mut offset = vec![0usize; 2 * g.num_edges()];
        for v in 0..g.num_vertices() {
            for d in g.ends_at(v) {
                offset[d.index()] = germs.len();
                for k in 0..g.order(v) {
                    germs.push((v, d, k));
                }
            }
        }
        GermSet { germs, offset }
    }

    pub fn index(&self, end: End, k: usize, _x: &MarkedGraph) -> usize {
        self.offset[end.index()] + k
    }

    pub fn len(&self) -> usize {
        self.germs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.germs.is_empty()
    }
}

/// A partition of germs; `class[i]` is the gate of germ i.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateStructure {
    pub germs: GermSet,
    pub class: Vec<usize>,
}

impl PartialEq for GermSet {
    fn eq(&self, o: &Self) -> bool {
        self.germs == o.germs
    }
}

impl Eq for GermSet {}

impl GateStructure {
    pub fn num_gates(&self) -> usize {
        let mut c = self.class.clone();
        c.sort();
        c.dedup();
        c.len()
    }

    /// Gates at vertex v, each a list of germ indices.
    pub fn gates_at(&self, v: usize) -> Vec<Vec<usize>> {
        let mut m: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (i, &(w, _, _)) in self.germs.germs.iter().enumerate() {
            if w == v {
                m.entry(self.class[i]).or_default().push(i);
            }
        }
        m.into_values().collect()
    }

    /// The turn between arriving along `inc` and leaving along `out` after decoration `dec`.
    pub fn turn_legal(&self, x: &MarkedGraph, inc: OEdge, dec: usize, out: OEdge) -> bool {
        let a = self.germs.index(inc.finish_end(), 0, x);
        let b = self.germs.index(out.start_end(), dec, x);
        self.class[a] != self.class[b]
    }

    /// Positions i such that the turn between steps i and i+1 is illegal.
    pub fn illegal_turns(&self, x: &MarkedGraph, steps: &[Step], cyclic: bool) -> Vec<usize> {
        let n = steps.len();
        let last = if cyclic { n } else { n.saturating_sub(1) };
        (0..last)
            .filter(|&i| {
                let j = (i + 1) % n;
                !(n == 0 || self.turn_legal(x, steps[i].edge, steps[i].dec, steps[j].edge))
            })
            .collect()
    }

    pub fn is_legal_path(&self, x: &MarkedGraph, p: &Path) -> bool {
        self.illegal_turns(x, &p.steps, false).is_empty()
    }

    /// Longest legal subpath of a path.
    pub fn max_legal_subpath(&self, x: &MarkedGraph, p: &Path) -> Q {
        let bad = self.illegal_turns(x, &p.steps, false);
        let mut best = Q::zero();
        let mut start = 0usize;
        for cut in bad.iter().map(|&i| i + 1).chain(std::iter::once(p.steps.len())) {
            let l = x.steps_length(&p.steps[start..cut]);
            if l > best {
                best = l;
            }
            start = cut;
        }
        best
    }

    /// Longest legal subpath of a periodic line; None if the whole line is legal.
    pub fn max_legal_in_loop(&self, x: &MarkedGraph, l: &Loop) -> Option<Q> {
        let bad = self.illegal_turns(x, &l.steps, true);
        if bad.is_empty() {
            return None;
        }
        let n = l.steps.len();
        let mut best = Q::zero();
        for (k, &i) in bad.iter().enumerate() {
            let j = bad[(k + 1) % bad.len()];
            // steps i+1 ..= j, cyclically
            let mut len = Q::zero();
            let mut s = (i + 1) % n;
            loop {
                len += &x.lengths[l.steps[s].edge.edge()];
                if s == j {
                    break;
                }
                s = (s + 1) % n;
            }
            if len > best {
                best = len;
            }
        }
        Some(best)
    }
}

fn partition_from_images(gs: &GermSet, images: &[Option<usize>]) -> Vec<usize> {
    // germs at the same vertex with the same non-collapsed image share a gate
    let n = gs.len();
    let mut class: Vec<usize> = (0..n).collect();
    let mut seen: std::collections::HashMap<(usize, usize), usize> = Default::default();
    for i in 0..n {
        if let Some(t) = images[i] {
            let v = gs.germs[i].0;
            match seen.get(&(v, t)) {
                Some(&c) => class[i] = c,
                None => {
                    seen.insert((v, t), i);
                }
            }
        }
    }
    class
}

fn find(uf: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while uf[r] != r {
        r = uf[r];
    }
    let mut j = i;
    while uf[j] != r {
        let next = uf[j];
        uf[j] = r;
        j = next;
    }
    r
}

fn normalize_classes(uf: &mut [usize]) -> Vec<usize> {
    let n = uf.len();
    let roots: Vec<usize> = (0..n).map(|i| find(uf, i)).collect();
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    roots
        .iter()
        .map(|&r| {
            if label[r] == usize::MAX {
                label[r] = next;
                next += 1;
            }
            label[r]
        })
        .collect()
}

/// (∼_f, ∼_f^∞): germs with equal non-collapsed images under f, respectively under some f^i.
pub fn gate_structures(f: &GraphMap) -> (GateStructure, GateStructure) {
    let gs = f.germs();
    let n = gs.len();
    let df: Vec<Option<usize>> = (0..n).map(|i| f.germ_image(&gs, i)).collect();
    let mut one: Vec<usize> = partition_from_images(&gs, &df);
    let one = normalize_classes(&mut one);
    let mut uf: Vec<usize> = (0..n).collect();
    let mut cur: Vec<Option<usize>> = df.clone();
    for _ in 0..=n {
        let part = partition_from_images(&gs, &cur);
        for i in 0..n {
            let (a, b) = (find(&mut uf, i), find(&mut uf, part[i]));
            if a != b {
                uf[a] = b;
            }
        }
        cur = cur.iter().map(|c| c.and_then(|t| df[t])).collect();
    }
    let inf = normalize_classes(&mut uf);
    (GateStructure { germs: gs.clone(), class: one }, GateStructure { germs: gs, class: inf })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// f(edge) has an illegal turn after step `position`.
    IllegalEdgeImage { edge: usize, position: usize },
    /// inequivalent germs at a vertex become equivalent.
    GermsIdentified { germs: (usize, usize) },
    CollapsedEdge { edge: usize },
}

#[derive(Clone, Debug)]
pub struct TrainTrackCheck {
    pub ok: bool,
    pub witness: Option<Violation>,
}

/// Checks both train-track conditions against ∼_f^∞.
pub fn is_train_track(f: &GraphMap) -> TrainTrackCheck {
    let (_, inf) = gate_structures(f);
    is_train_track_for(f, &inf)
}

pub fn is_train_track_for(f: &GraphMap, gates: &GateStructure) -> TrainTrackCheck {
    let x = &f.x;
    for (e, p) in f.edge_images.iter().enumerate() {
        if p.steps.is_empty() {
            return TrainTrackCheck { ok: false, witness: Some(Violation::CollapsedEdge { edge: e }) };
        }
        if let Some(&i) = gates.illegal_turns(x, &p.steps, false).first() {
            return TrainTrackCheck { ok: false, witness: Some(Violation::IllegalEdgeImage { edge: e, position: i }) };
        }
    }
    let gs = &gates.germs;
    let img: Vec<Option<usize>> = (0..gs.len()).map(|i| f.germ_image(gs, i)).collect();
    for i in 0..gs.len() {
        for j in i + 1..gs.len() {
            if gs.germs[i].0 != gs.germs[j].0 || gates.class[i] == gates.class[j] {
                continue;
            }
            if let (Some(a), Some(b)) = (img[i], img[j]) {
                if gates.class[a] == gates.class[b] {
                    return TrainTrackCheck { ok: false, witness: Some(Violation::GermsIdentified { germs: (i, j) }) };
                }
            }
        }
    }
    TrainTrackCheck { ok: true, witness: None }
}

/// Distance in the tree from the vertex `a` to the axis of the loop `h` at the base.
fn dist_to_axis(x: &MarkedGraph, a: &Path, h: &Path, h_len: &Q) -> Q {
    let g = &*x.graph;
    let c = g.reduce(&g.concat(&g.concat(&g.inverse(a), h), a));
    (x.steps_length(&c.steps) - h_len) / qi(2)
}

/// Default map: group vertices go to their fixed vertices, free vertices to a vertex
/// minimizing the total distance to the image axes of candidate loops through them.
pub fn build_map(x: &MarkedGraph, phi: &FPAutomorphism) -> GraphMap {
    let g = &*x.graph;
    let (_, tau) = g.spanning_tree(x.base);
    let cands = candidates(x);
    let mut paths = Vec::with_capacity(g.num_vertices());
    for v in 0..g.num_vertices() {
        if !g.is_free(v) {
            let stab = x.read_path(&g.concat(&g.concat(&tau[v], &Path { start: v, init: 1, steps: vec![] }), &g.inverse(&tau[v])));
            let img = x.image(&phi.apply(&stab));
            let (q, _) = g.cyclic_core(&img);
            paths.push(q);
            continue;
        }
        // image axes of loops through v
        let mut axes: Vec<(Path, Q)> = Vec::new();
        for c in &cands {
            let n = c.lp.steps.len();
            for r in 0..n {
                if g.origin(c.lp.steps[r].edge) != v {
                    continue;
                }
                let steps: Vec<Step> = c.lp.steps[r..].iter().chain(&c.lp.steps[..r]).copied().collect();
                let lp = Path { start: v, init: 0, steps };
                let word = x.read_path(&g.concat(&g.concat(&tau[v], &lp), &g.inverse(&tau[v])));
                let h = x.image(&phi.apply(&word));
                let hl = x.translation_length(&phi.apply(&word));
                axes.push((h, hl));
            }
            if axes.len() > 64 {
                break;
            }
        }
        let cost = |a: &Path| -> Q { axes.iter().map(|(h, l)| dist_to_axis(x, a, h, l)).sum() };
        let mut cur = Path::trivial(x.base);
        let mut cur_cost = cost(&cur);
        for _ in 0..10_000 {
            let w = g.path_end(&cur);
            let mut best: Option<(Q, Path)> = None;
            for d in g.ends_at(w) {
                for k in 0..g.order(w) {
                    let mut p = cur.clone();
                    g.push_dec(&mut p, k);
                    g.push_step(&mut p, d.leaving(), 0);
                    let c = cost(&p);
                    if c < cur_cost && best.as_ref().map_or(true, |(b, _)| c < *b) {
                        best = Some((c, p));
                    }
                }
            }
            match best {
                Some((c, p)) => {
                    cur = p;
                    cur_cost = c;
                }
                None => break,
            }
        }
        paths.push(cur);
    }
    let f = GraphMap::with_vertex_paths(x, phi, paths).expect("fixed vertices");
    tighten(f)
}

/// Tree neighbours of the vertex represented by `p`.
fn vertex_moves(g: &Graph, p: &Path) -> Vec<Path> {
    let w = g.path_end(p);
    let mut out = Vec::new();
    for d in g.ends_at(w) {
        for k in 0..g.order(w) {
            let mut q = p.clone();
            g.push_dec(&mut q, k);
            g.push_step(&mut q, d.leaving(), 0);
            out.push(q);
        }
    }
    out
}

/// Steepest descent on (collapsed edges, Lip, total image length) over moves of one or two
/// free vertex images to neighbouring tree vertices.
fn tighten(mut f: GraphMap) -> GraphMap {
    let g = f.x.graph.clone();
    let score = |f: &GraphMap| -> (usize, Q, Q) {
        let total: Q = f.edge_images.iter().map(|p| f.x.steps_length(&p.steps)).sum();
        let collapsed = f.edge_images.iter().filter(|p| p.steps.is_empty()).count();
        (collapsed, f.lip(), total)
    };
    let free: Vec<usize> = (0..g.num_vertices()).filter(|&v| g.is_free(v)).collect();
    let mut cur = score(&f);
    for _ in 0..1000 {
        let mut best: Option<((usize, Q, Q), GraphMap)> = None;
        let consider = |paths: Vec<Path>, best: &mut Option<((usize, Q, Q), GraphMap)>| {
            let cand = GraphMap::with_vertex_paths(&f.x, &f.phi, paths).expect("free vertex move");
            let s = score(&cand);
            if s < cur && best.as_ref().map_or(true, |(b, _)| s < *b) {
                *best = Some((s, cand));
            }
        };
        for (i, &u) in free.iter().enumerate() {
            let mu = vertex_moves(&g, &f.vertex_paths[u]);
            for a in &mu {
                let mut paths = f.vertex_paths.clone();
                paths[u] = a.clone();
                consider(paths, &mut best);
            }
            for &v in &free[i + 1..] {
                let mv = vertex_moves(&g, &f.vertex_paths[v]);
                for a in &mu {
                    for b in &mv {
                        let mut paths = f.vertex_paths.clone();
                        paths[u] = a.clone();
                        paths[v] = b.clone();
                        consider(paths, &mut best);
                    }
                }
            }
        }
        match best {
            Some((s, cand)) => {
                f = cand;
                cur = s;
            }
            None => break,
        }
    }
    f
}
