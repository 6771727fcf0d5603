//! Points of relative outer space: marked metric graphs of groups.
//!
//! Besides the marking `m: G -> pi_1` (generator images as decorated paths at the base)
//! every point carries its inverse, the reading `rho`, which labels edges and vertex groups
//! by elements of `G`. Reading a path multiplies labels along it.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::freeprod::{FPAutomorphism, Fs, Syllable, Word};
use crate::graph::{Core, Edge, End, Graph, Loop, OEdge, Path, Step, Vertex};
use crate::rational::Q;

/// Image of vertex group `G_i`: `path . [iso(g)] . path^-1`, `iso: G_i -> G_label(end)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupMark {
    pub path: Path,
    pub iso: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Marking {
    pub free: Vec<Path>,
    pub groups: Vec<GroupMark>,
}

/// `iota_v(g) = conj [group, iso(g)] conj^-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexReading {
    pub conj: Word,
    pub group: usize,
    pub iso: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reading {
    pub edges: Vec<Word>,
    pub vertices: Vec<Option<VertexReading>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedGraph {
    pub graph: Arc<Graph>,
    pub lengths: Vec<Q>,
    pub base: usize,
    pub marking: Marking,
    pub reading: Reading,
}

/// Graph-of-groups isomorphism between two points, with the conjugator of the change of marking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isomorphism {
    pub vertex_map: Vec<usize>,
    pub edge_map: Vec<OEdge>,
    pub group_isos: Vec<Option<Vec<usize>>>,
    /// Indexed by `End::index` of the source.
    pub twists: Vec<usize>,
    pub conjugator: Word,
}

/// One-edge expansion; collapsing `new_edge` gives back the original point.
#[derive(Clone, Debug)]
pub struct BlowUp {
    pub point: MarkedGraph,
    pub new_edge: usize,
}

impl MarkedGraph {
    /// Builds and validates a point. Without a reading, one is derived from a spanning tree
    /// along which the marking is standard.
    pub fn new(
        graph: Graph,
        lengths: Vec<Q>,
        base: usize,
        marking: Marking,
        reading: Option<Reading>,
    ) -> Result<MarkedGraph> {
        Self::from_arc(Arc::new(graph), lengths, base, marking, reading)
    }

    pub fn from_arc(
        graph: Arc<Graph>,
        lengths: Vec<Q>,
        base: usize,
        marking: Marking,
        reading: Option<Reading>,
    ) -> Result<MarkedGraph> {
        check_graph(&graph, &lengths, base)?;
        check_marking_shape(&graph, base, &marking)?;
        let reading = match reading {
            Some(r) => r,
            None => standard_reading(&graph, base, &marking)?,
        };
        let x = MarkedGraph { graph, lengths, base, marking, reading };
        x.check_reading()?;
        Ok(x)
    }

    pub fn fs(&self) -> &Fs {
        &self.graph.fs
    }

    pub fn num_edges(&self) -> usize {
        self.graph.num_edges()
    }

    fn check_reading(&self) -> Result<()> {
        let g = &*self.graph;
        let fs = self.fs();
        let bad = |m: String| Err(Error::InvalidGraph(m));
        let r = &self.reading;
        if r.edges.len() != g.num_edges() || r.vertices.len() != g.num_vertices() {
            return bad("reading has the wrong size".into());
        }
        for (v, vr) in r.vertices.iter().enumerate() {
            match (g.vertices[v].group, vr) {
                (None, None) => {}
                (Some(j), Some(vr)) => {
                    if vr.group >= fs.num_groups()
                        || !fs.group(j).is_isomorphism(fs.group(vr.group), &vr.iso)
                    {
                        return bad(format!("vertex {}: reading is not an isomorphism", g.vertices[v].name));
                    }
                }
                _ => return bad(format!("vertex {}: reading does not match its group", g.vertices[v].name)),
            }
        }
        for x in fs.generators() {
            let back = self.read_path(&self.image(&x));
            if back != x {
                return bad(format!(
                    "reading does not invert the marking on {}",
                    fs.format_word(&x)
                ));
            }
        }
        let (in_tree, tree) = g.spanning_tree(self.base);
        for (i, e) in g.edges.iter().enumerate() {
            if in_tree[i] {
                continue;
            }
            let mut gamma = tree[e.from].clone();
            g.push_step(&mut gamma, OEdge::new(i, false), 0);
            g.append(&mut gamma, &g.inverse(&tree[e.to]));
            if g.reduce(&self.image(&self.read_path(&gamma))) != gamma {
                return bad(format!("marking misses the loop through edge {}", e.name));
            }
        }
        for v in 0..g.num_vertices() {
            for h in 1..g.order(v) {
                let mut gamma = tree[v].clone();
                g.push_dec(&mut gamma, h);
                g.append(&mut gamma, &g.inverse(&tree[v]));
                if self.image(&self.read_path(&gamma)) != gamma {
                    return bad(format!("marking misses the group at {}", g.vertices[v].name));
                }
            }
        }
        Ok(())
    }

    /// Reduced decorated closed path at the base representing `w`.
    pub fn image(&self, w: &Word) -> Path {
        let g = &*self.graph;
        let mut p = Path::trivial(self.base);
        for s in &w.0 {
            match *s {
                Syllable::Free { letter, exp } => {
                    let f = &self.marking.free[letter];
                    let piece = if exp > 0 { f.clone() } else { g.inverse(f) };
                    for _ in 0..exp.unsigned_abs() {
                        g.append(&mut p, &piece);
                    }
                }
                Syllable::Vertex { group, elem } => {
                    let gm = &self.marking.groups[group];
                    g.append(&mut p, &gm.path);
                    g.push_dec(&mut p, gm.iso[elem]);
                    g.append(&mut p, &g.inverse(&gm.path));
                }
            }
        }
        p
    }

    pub fn vertex_word(&self, v: usize, h: usize) -> Word {
        match &self.reading.vertices[v] {
            Some(vr) if h != 0 => {
                let fs = self.fs();
                fs.conj(&vr.conj, &fs.vertex_elem(vr.group, vr.iso[h]))
            }
            _ => Word::empty(),
        }
    }

    pub fn edge_word(&self, oe: OEdge) -> Word {
        let l = &self.reading.edges[oe.edge()];
        if oe.is_rev() {
            self.fs().inverse(l)
        } else {
            l.clone()
        }
    }

    /// The group element read along a path (any endpoints).
    pub fn read_path(&self, p: &Path) -> Word {
        let g = &*self.graph;
        let fs = self.fs();
        let mut raw: Vec<Syllable> = self.vertex_word(p.start, p.init).0;
        for s in &p.steps {
            raw.extend(self.edge_word(s.edge).0);
            raw.extend(self.vertex_word(g.terminus(s.edge), s.dec).0);
        }
        fs.nf(raw)
    }

    pub fn read_loop(&self, l: &Loop) -> Word {
        self.read_path(&self.graph.loop_as_path(l))
    }

    pub fn core(&self, w: &Word) -> (Path, Core) {
        self.graph.cyclic_core(&self.image(w))
    }

    /// Reduced cyclic loop of a hyperbolic element.
    pub fn loop_of(&self, w: &Word) -> Result<Loop> {
        match self.core(w).1 {
            Core::Hyperbolic(l) => Ok(l),
            Core::Elliptic { .. } => Err(Error::EllipticElement),
        }
    }

    pub fn steps_length(&self, steps: &[Step]) -> Q {
        steps.iter().map(|s| &self.lengths[s.edge.edge()]).sum()
    }

    pub fn translation_length(&self, w: &Word) -> Q {
        match self.core(w).1 {
            Core::Hyperbolic(l) => self.steps_length(&l.steps),
            Core::Elliptic { .. } => Q::zero(),
        }
    }

    /// Edge crossing counts of the axis of `w`; zero for elliptic elements.
    pub fn shape(&self, w: &Word) -> Vec<u32> {
        match self.core(w).1 {
            Core::Hyperbolic(l) => self.graph.shape_of_steps(&l.steps),
            Core::Elliptic { .. } => vec![0; self.num_edges()],
        }
    }

    pub fn volume(&self) -> Q {
        self.lengths.iter().sum()
    }

    pub fn min_edge(&self) -> Q {
        self.lengths.iter().min().cloned().unwrap_or_else(Q::zero)
    }

    pub fn rescale(&self, c: &Q) -> Result<MarkedGraph> {
        if !c.is_positive() {
            return Err(Error::NonPositiveScale);
        }
        let mut x = self.clone();
        for l in &mut x.lengths {
            *l = &*l * c;
        }
        Ok(x)
    }

    pub fn normalized(&self) -> MarkedGraph {
        let v = self.volume();
        self.rescale(&(Q::from_integer(1.into()) / v)).expect("positive volume")
    }

    /// Same simplex, new lengths (all positive).
    pub fn with_lengths(&self, lengths: Vec<Q>) -> Result<MarkedGraph> {
        if lengths.len() != self.num_edges() || lengths.iter().any(|l| !l.is_positive()) {
            return Err(Error::InvalidGraph("lengths must be positive, one per edge".into()));
        }
        let mut x = self.clone();
        x.lengths = lengths;
        Ok(x)
    }

    /// The point `X phi`: marking `m o phi`, reading `phi^-1 o rho`.
    pub fn twist(&self, phi: &FPAutomorphism) -> MarkedGraph {
        let g = &*self.graph;
        let fs = self.fs();
        let fwd = phi.forward();
        let free = fwd.free.iter().map(|w| self.image(w)).collect();
        let groups = fwd
            .groups
            .iter()
            .map(|vi| {
                let gm = &self.marking.groups[vi.target];
                let mut p = self.image(&vi.conj);
                g.append(&mut p, &gm.path);
                let u = g.path_end(&p);
                let d = p.final_dec();
                clear_final_dec(&mut p);
                let iso = vi
                    .iso
                    .iter()
                    .map(|&x| {
                        let y = gm.iso[x];
                        g.dmul(u, g.dmul(u, d, y), g.dinv(u, d))
                    })
                    .collect();
                GroupMark { path: p, iso }
            })
            .collect();
        let inv = phi.inverse_images();
        let edges = self.reading.edges.iter().map(|w| phi.apply_inverse(w)).collect();
        let vertices = self
            .reading
            .vertices
            .iter()
            .map(|vr| {
                vr.as_ref().map(|vr| {
                    let back = &inv.groups[vr.group];
                    VertexReading {
                        conj: fs.mul(&phi.apply_inverse(&vr.conj), &back.conj),
                        group: back.target,
                        iso: vr.iso.iter().map(|&x| back.iso[x]).collect(),
                    }
                })
            })
            .collect();
        MarkedGraph {
            graph: self.graph.clone(),
            lengths: self.lengths.clone(),
            base: self.base,
            marking: Marking { free, groups },
            reading: Reading { edges, vertices },
        }
    }

    /// Collapses a forest whose components carry at most one vertex group each.
    pub fn collapse_forest(&self, forest: &[usize]) -> Result<MarkedGraph> {
        let g = &*self.graph;
        let nv = g.num_vertices();
        let in_f: Vec<bool> = (0..g.num_edges()).map(|i| forest.contains(&i)).collect();
        if forest.iter().any(|&e| e >= g.num_edges()) {
            return Err(Error::IndexOutOfRange(format!("edge in forest {forest:?}")));
        }
        if forest.is_empty() {
            return Ok(self.clone());
        }
        // components by union-find
        let mut parent: Vec<usize> = (0..nv).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for (i, e) in g.edges.iter().enumerate() {
            if !in_f[i] {
                continue;
            }
            let (a, b) = (find(&mut parent, e.from), find(&mut parent, e.to));
            if a == b {
                return Err(Error::NotAForest);
            }
            parent[a] = b;
        }
        let roots: Vec<usize> = (0..nv).map(|v| find(&mut parent, v)).collect();
        let comp_ids: Vec<usize> = roots.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let comp_of: Vec<usize> = roots.iter().map(|r| comp_ids.binary_search(r).unwrap()).collect();
        let nc = comp_ids.len();
        let mut group_vertex: Vec<Option<usize>> = vec![None; nc];
        for v in 0..nv {
            if !g.is_free(v) {
                let c = comp_of[v];
                if group_vertex[c].is_some() {
                    return Err(Error::FaceAtInfinity);
                }
                group_vertex[c] = Some(v);
            }
        }
        // potentials along the forest from a root per component
        let fs = self.fs();
        let mut pot: Vec<Option<Word>> = vec![None; nv];
        for c in 0..nc {
            let root = if comp_of[self.base] == c {
                self.base
            } else if let Some(v) = group_vertex[c] {
                v
            } else {
                (0..nv).find(|&v| comp_of[v] == c).unwrap()
            };
            pot[root] = Some(Word::empty());
            let mut stack = vec![root];
            while let Some(x) = stack.pop() {
                for (i, e) in g.edges.iter().enumerate() {
                    if !in_f[i] {
                        continue;
                    }
                    for rev in [false, true] {
                        let (a, b) = if rev { (e.to, e.from) } else { (e.from, e.to) };
                        if a == x && pot[b].is_none() {
                            let w = fs.mul(pot[x].as_ref().unwrap(), &self.edge_word(OEdge::new(i, rev)));
                            pot[b] = Some(w);
                            stack.push(b);
                        }
                    }
                }
            }
        }
        let pot: Vec<Word> = pot.into_iter().map(|p| p.unwrap()).collect();
        let keep: Vec<usize> = (0..g.num_edges()).filter(|&i| !in_f[i]).collect();
        let mut new_index = vec![usize::MAX; g.num_edges()];
        for (k, &i) in keep.iter().enumerate() {
            new_index[i] = k;
        }
        let vertices: Vec<Vertex> = (0..nc)
            .map(|c| match group_vertex[c] {
                Some(v) => g.vertices[v].clone(),
                None => {
                    let v = (0..nv).find(|&v| comp_of[v] == c).unwrap();
                    g.vertices[v].clone()
                }
            })
            .collect();
        let edges: Vec<Edge> = keep
            .iter()
            .map(|&i| {
                let e = &g.edges[i];
                Edge { name: e.name.clone(), from: comp_of[e.from], to: comp_of[e.to] }
            })
            .collect();
        let ng = Graph { fs: fs.clone(), vertices, edges };
        let map_path = |p: &Path| -> Path {
            let mut q = Path { start: comp_of[p.start], init: p.init, steps: Vec::new() };
            for s in &p.steps {
                if in_f[s.edge.edge()] {
                    ng.push_dec(&mut q, s.dec);
                } else {
                    ng.push_step(&mut q, OEdge::new(new_index[s.edge.edge()], s.edge.is_rev()), 0);
                    ng.push_dec(&mut q, s.dec);
                }
            }
            q
        };
        let marking = Marking {
            free: self.marking.free.iter().map(&map_path).collect(),
            groups: self
                .marking
                .groups
                .iter()
                .map(|gm| GroupMark { path: map_path(&gm.path), iso: gm.iso.clone() })
                .collect(),
        };
        let reading = Reading {
            edges: keep
                .iter()
                .map(|&i| {
                    let e = &g.edges[i];
                    fs.mul_all([&pot[e.from], &self.reading.edges[i], &fs.inverse(&pot[e.to])])
                })
                .collect(),
            vertices: (0..nc)
                .map(|c| {
                    group_vertex[c].map(|v| {
                        let vr = self.reading.vertices[v].clone().expect("group vertex reading");
                        VertexReading { conj: fs.mul(&pot[v], &vr.conj), ..vr }
                    })
                })
                .collect(),
        };
        let lengths = keep.iter().map(|&i| self.lengths[i].clone()).collect();
        MarkedGraph::new(ng, lengths, comp_of[self.base], marking, Some(reading))
    }

    /// All one-edge expansions at `v`; the new edge gets length `eps`.
    pub fn blow_ups(&self, v: usize, eps: &Q) -> Vec<BlowUp> {
        let g = &*self.graph;
        let ends = g.ends_at(v);
        let n = ends.len();
        if n > 16 {
            return Vec::new();
        }
        let order = g.order(v);
        let free = g.is_free(v);
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            let e2: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            if e2.len() < 2 {
                continue;
            }
            if free && (mask & 1 == 1 || n - e2.len() < 2) {
                continue;
            }
            let free_twists = e2.len() - 1;
            let combos = if free { 1 } else { order.pow(free_twists as u32) };
            for t in 0..combos {
                let mut tw = vec![0usize; n];
                let mut r = t;
                for &i in e2.iter().skip(1) {
                    tw[i] = r % order;
                    r /= order;
                }
                let in_e2: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
                if let Ok(b) = self.expand(v, &ends, &in_e2, &tw, eps) {
                    out.push(b);
                }
            }
        }
        out
    }

    fn expand(&self, v: usize, ends: &[End], in_e2: &[bool], tw: &[usize], eps: &Q) -> Result<BlowUp> {
        let g = &*self.graph;
        let fs = self.fs();
        let v2 = g.num_vertices();
        let eps_edge = g.num_edges();
        let pos = |d: End| ends.iter().position(|&x| x == d);
        let side = |d: Option<End>| d.and_then(pos).filter(|&i| in_e2[i]);
        let mut vertices = g.vertices.clone();
        vertices.push(Vertex { name: format!("{}'", g.vertices[v].name), group: None });
        let mut edges = g.edges.clone();
        for (i, d) in ends.iter().enumerate() {
            if in_e2[i] {
                let e = &mut edges[d.edge];
                if d.head {
                    e.to = v2;
                } else {
                    e.from = v2;
                }
            }
        }
        edges.push(Edge { name: fresh_name(g, "eps"), from: v, to: v2 });
        let ng = Graph { fs: fs.clone(), vertices, edges };
        let fwd = OEdge::new(eps_edge, false);
        let passage = |q: &mut Path, arrive: Option<End>, dec: usize, leave: Option<End>| {
            match (side(arrive), side(leave)) {
                (None, None) => ng.push_dec(q, dec),
                (Some(a), None) => ng.push_step(q, fwd.inv(), g.dmul(v, g.dinv(v, tw[a]), dec)),
                (None, Some(b)) => {
                    ng.push_dec(q, g.dmul(v, dec, tw[b]));
                    ng.push_step(q, fwd, 0);
                }
                (Some(a), Some(b)) => {
                    let k = g.dmul(v, g.dmul(v, g.dinv(v, tw[a]), dec), tw[b]);
                    if k != 0 {
                        ng.push_step(q, fwd.inv(), k);
                        ng.push_step(q, fwd, 0);
                    }
                }
            }
        };
        let lift = |p: &Path| -> Path {
            let mut q = Path::trivial(p.start);
            let mut arrive: Option<End> = None;
            let mut dec = p.init;
            let mut at = p.start;
            for s in &p.steps {
                let leave = Some(s.edge.start_end());
                if at == v {
                    passage(&mut q, arrive, dec, leave);
                } else {
                    ng.push_dec(&mut q, dec);
                }
                ng.push_step(&mut q, s.edge, 0);
                arrive = Some(s.edge.finish_end());
                dec = s.dec;
                at = g.terminus(s.edge);
            }
            if at == v {
                passage(&mut q, arrive, dec, None);
            } else {
                ng.push_dec(&mut q, dec);
            }
            q
        };
        let free_paths = self.marking.free.iter().map(&lift).collect();
        let groups = self
            .marking
            .groups
            .iter()
            .map(|gm| {
                let mut p = lift(&gm.path);
                let u = ng.path_end(&p);
                let d = p.final_dec();
                clear_final_dec(&mut p);
                let iso = gm.iso.iter().map(|&y| ng.dmul(u, ng.dmul(u, d, y), ng.dinv(u, d))).collect();
                GroupMark { path: p, iso }
            })
            .collect();
        let mut edge_labels = self.reading.edges.clone();
        for (i, d) in ends.iter().enumerate() {
            if in_e2[i] && tw[i] != 0 {
                let h = self.vertex_word(v, tw[i]);
                let l = &edge_labels[d.edge];
                edge_labels[d.edge] = if d.head { fs.mul(l, &h) } else { fs.mul(&fs.inverse(&h), l) };
            }
        }
        edge_labels.push(Word::empty());
        let mut vreads = self.reading.vertices.clone();
        vreads.push(None);
        let mut lengths = self.lengths.clone();
        lengths.push(eps.clone());
        let point = MarkedGraph::new(
            ng,
            lengths,
            self.base,
            Marking { free: free_paths, groups },
            Some(Reading { edges: edge_labels, vertices: vreads }),
        )?;
        Ok(BlowUp { point, new_edge: eps_edge })
    }

    /// Witness that the two points are equal (same lengths, marking up to inner).
    pub fn points_equal(&self, other: &MarkedGraph) -> Option<Isomorphism> {
        self.isomorphism(other, true)
    }

    /// Witness that the two points lie in the same open simplex.
    pub fn same_simplex(&self, other: &MarkedGraph) -> Option<Isomorphism> {
        self.isomorphism(other, false)
    }

    pub fn isomorphism(&self, other: &MarkedGraph, match_lengths: bool) -> Option<Isomorphism> {
        let (gx, gy) = (&*self.graph, &*other.graph);
        if gx.num_vertices() != gy.num_vertices() || gx.num_edges() != gy.num_edges() {
            return None;
        }
        let mut search = IsoSearch {
            x: self,
            y: other,
            match_lengths,
            vmap: vec![None; gx.num_vertices()],
            vused: vec![false; gy.num_vertices()],
            emap: Vec::new(),
            eused: vec![false; gy.num_edges()],
            found: None,
        };
        search.edges(0);
        search.found
    }

    /// `rho_Y(h(path))` for a graph-of-groups morphism given by the parts of an isomorphism.
    fn pushed_word(other: &MarkedGraph, iso: &Isomorphism, x: &MarkedGraph, p: &Path) -> Word {
        let gx = &*x.graph;
        let gy = &*other.graph;
        let map_end = |d: End| {
            let f = iso.edge_map[d.edge];
            End { edge: f.edge(), head: d.head ^ f.is_rev() }
        };
        let alpha = |v: usize, h: usize| iso.group_isos[v].as_ref().map_or(0, |a| a[h]);
        let tw = |d: End| iso.twists[d.index()];
        let mut q = Path::trivial(iso.vertex_map[p.start]);
        let mut at = p.start;
        let mut arrive: Option<End> = None;
        let mut dec = p.init;
        let pass = |q: &mut Path, at: usize, arrive: Option<End>, dec: usize, leave: Option<End>| {
            let u = iso.vertex_map[at];
            let mut d = alpha(at, dec);
            if let Some(a) = arrive {
                d = gy.dmul(u, gy.dinv(u, tw(a)), d);
            }
            if let Some(b) = leave {
                d = gy.dmul(u, d, tw(b));
            }
            if q.steps.is_empty() {
                q.init = gy.dmul(u, q.init, d);
            } else {
                let last = q.steps.len() - 1;
                q.steps[last].dec = gy.dmul(u, q.steps[last].dec, d);
            }
        };
        for s in &p.steps {
            pass(&mut q, at, arrive, dec, Some(s.edge.start_end()));
            let ye = map_end(s.edge.start_end()).leaving();
            q.steps.push(Step { edge: ye, dec: 0 });
            arrive = Some(s.edge.finish_end());
            dec = s.dec;
            at = gx.terminus(s.edge);
        }
        pass(&mut q, at, arrive, dec, None);
        other.read_path(&q)
    }
}

struct IsoSearch<'a> {
    x: &'a MarkedGraph,
    y: &'a MarkedGraph,
    match_lengths: bool,
    vmap: Vec<Option<usize>>,
    vused: Vec<bool>,
    emap: Vec<OEdge>,
    eused: Vec<bool>,
    found: Option<Isomorphism>,
}

impl IsoSearch<'_> {
    fn vertex_ok(&self, a: usize, b: usize) -> bool {
        let (gx, gy) = (&*self.x.graph, &*self.y.graph);
        gx.valence(a) == gy.valence(b)
            && gx.is_free(a) == gy.is_free(b)
            && gx.order(a) == gy.order(b)
    }

    fn bind(&mut self, a: usize, b: usize, undo: &mut Vec<usize>) -> bool {
        match self.vmap[a] {
            Some(c) => c == b,
            None => {
                if self.vused[b] || !self.vertex_ok(a, b) {
                    return false;
                }
                self.vmap[a] = Some(b);
                self.vused[b] = true;
                undo.push(a);
                true
            }
        }
    }

    fn edges(&mut self, i: usize) {
        if self.found.is_some() {
            return;
        }
        let (gx, gy) = (&*self.x.graph, &*self.y.graph);
        if i == gx.num_edges() {
            self.decorations();
            return;
        }
        let e = &gx.edges[i];
        for j in 0..gy.num_edges() {
            if self.eused[j] || (self.match_lengths && self.x.lengths[i] != self.y.lengths[j]) {
                continue;
            }
            for rev in [false, true] {
                let f = OEdge::new(j, rev);
                let mut undo = Vec::new();
                let ok = self.bind(e.from, gy.origin(f), &mut undo) && self.bind(e.to, gy.terminus(f), &mut undo);
                if ok {
                    self.eused[j] = true;
                    self.emap.push(f);
                    self.edges(i + 1);
                    self.emap.pop();
                    self.eused[j] = false;
                }
                for a in undo {
                    let b = self.vmap[a].take().unwrap();
                    self.vused[b] = false;
                }
                if self.found.is_some() {
                    return;
                }
            }
        }
    }

    fn decorations(&mut self) {
        let (gx, gy) = (&*self.x.graph, &*self.y.graph);
        let vmap: Vec<usize> = self.vmap.iter().map(|v| v.expect("all vertices hit")).collect();
        // choices per group vertex: isomorphism, then twists of every end but the first
        let mut iso_choices: Vec<(usize, Vec<Vec<usize>>)> = Vec::new();
        let mut twist_slots: Vec<(End, usize)> = Vec::new();
        for v in 0..gx.num_vertices() {
            if let (Some(a), Some(b)) = (gx.group_at(v), gy.group_at(vmap[v])) {
                let isos = a.isomorphisms_to(b);
                if isos.is_empty() {
                    return;
                }
                iso_choices.push((v, isos));
                for d in gx.ends_at(v).into_iter().skip(1) {
                    twist_slots.push((d, b.order()));
                }
            }
        }
        let gens = self.x.fs().generators();
        let paths: Vec<Path> = gens.iter().map(|w| self.x.image(w)).collect();
        let mut idx = vec![0usize; iso_choices.len()];
        loop {
            let mut group_isos: Vec<Option<Vec<usize>>> = vec![None; gx.num_vertices()];
            for (k, (v, isos)) in iso_choices.iter().enumerate() {
                group_isos[*v] = Some(isos[idx[k]].clone());
            }
            let mut tw = vec![0usize; twist_slots.len()];
            loop {
                let mut twists = vec![0usize; 2 * gx.num_edges()];
                for (k, (d, _)) in twist_slots.iter().enumerate() {
                    twists[d.index()] = tw[k];
                }
                let mut cand = Isomorphism {
                    vertex_map: vmap.clone(),
                    edge_map: self.emap.clone(),
                    group_isos: group_isos.clone(),
                    twists,
                    conjugator: Word::empty(),
                };
                let pairs: Vec<(Word, Word)> = gens
                    .iter()
                    .zip(&paths)
                    .map(|(w, p)| (w.clone(), MarkedGraph::pushed_word(self.y, &cand, self.x, p)))
                    .collect();
                if let Some(c) = self.x.fs().common_conjugator(&pairs) {
                    cand.conjugator = c;
                    self.found = Some(cand);
                    return;
                }
                if !bump(&mut tw, |k| twist_slots[k].1) {
                    break;
                }
            }
            if !bump(&mut idx, |k| iso_choices[k].1.len()) {
                break;
            }
        }
    }
}

/// Mixed-radix increment; false after the last combination.
fn bump(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for k in 0..digits.len() {
        digits[k] += 1;
        if digits[k] < radix(k) {
            return true;
        }
        digits[k] = 0;
    }
    false
}

fn clear_final_dec(p: &mut Path) {
    match p.steps.last_mut() {
        Some(s) => s.dec = 0,
        None => p.init = 0,
    }
}

fn fresh_name(g: &Graph, stem: &str) -> String {
    let taken = |n: &str| g.edges.iter().any(|e| e.name == n);
    if !taken(stem) {
        return stem.to_string();
    }
    (1..).map(|k| format!("{stem}{k}")).find(|n| !taken(n)).unwrap()
}

fn check_graph(g: &Graph, lengths: &[Q], base: usize) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidGraph(m));
    if g.num_vertices() == 0 || g.num_edges() == 0 {
        return bad("graph needs vertices and edges".into());
    }
    if lengths.len() != g.num_edges() {
        return bad("one length per edge".into());
    }
    if lengths.iter().any(|l| !l.is_positive()) {
        return bad("edge lengths must be positive".into());
    }
    if base >= g.num_vertices() {
        return bad("base vertex out of range".into());
    }
    if g.edges.iter().any(|e| e.from >= g.num_vertices() || e.to >= g.num_vertices()) {
        return bad("edge endpoint out of range".into());
    }
    if !g.is_connected() {
        return bad("graph is not connected".into());
    }
    let mut used = vec![false; g.fs.num_groups()];
    for v in &g.vertices {
        match v.group {
            Some(i) if i >= used.len() => return bad(format!("vertex {}: unknown group", v.name)),
            Some(i) if std::mem::replace(&mut used[i], true) => {
                return bad(format!("vertex group {i} labels two vertices"))
            }
            _ => {}
        }
    }
    if used.iter().any(|u| !u) {
        return bad("every vertex group must label a vertex".into());
    }
    for (v, vx) in g.vertices.iter().enumerate() {
        if vx.group.is_none() && g.valence(v) < 3 {
            return bad(format!("free vertex {} has valence < 3", vx.name));
        }
    }
    let rank_ok = g.num_edges() + 1 == g.num_vertices() + g.fs.free_rank();
    if !rank_ok {
        return bad("first Betti number differs from the free rank".into());
    }
    Ok(())
}

fn check_path(g: &Graph, p: &Path, what: &str) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidGraph(format!("{what}: {m}")));
    if p.start >= g.num_vertices() {
        return bad("start out of range".into());
    }
    let mut at = p.start;
    let mut dec = p.init;
    for s in p.steps.iter() {
        if dec >= g.order(at) {
            return bad("decoration out of range".into());
        }
        if s.edge.edge() >= g.num_edges() || g.origin(s.edge) != at {
            return bad("edges do not join up".into());
        }
        at = g.terminus(s.edge);
        dec = s.dec;
    }
    if dec >= g.order(at) {
        return bad("decoration out of range".into());
    }
    Ok(())
}

fn check_marking_shape(g: &Graph, base: usize, m: &Marking) -> Result<()> {
    let fs = &g.fs;
    let bad = |s: String| Err(Error::InvalidGraph(s));
    if m.free.len() != fs.free_rank() || m.groups.len() != fs.num_groups() {
        return bad("marking must give one image per generator".into());
    }
    for (l, p) in m.free.iter().enumerate() {
        let name = &fs.free_names()[l];
        check_path(g, p, name)?;
        if p.start != base || g.path_end(p) != base {
            return bad(format!("image of {name} is not a loop at the base"));
        }
    }
    for (i, gm) in m.groups.iter().enumerate() {
        let name = fs.group(i).name();
        check_path(g, &gm.path, name)?;
        if gm.path.start != base {
            return bad(format!("path for {name} does not start at the base"));
        }
        let end = g.path_end(&gm.path);
        let Some(target) = g.group_at(end) else {
            return bad(format!("path for {name} ends at a free vertex"));
        };
        if gm.path.final_dec() != 0 {
            return bad(format!("path for {name} ends with a decoration"));
        }
        if !fs.group(i).is_isomorphism(target, &gm.iso) {
            return bad(format!("{name}: marking map is not an isomorphism"));
        }
    }
    Ok(())
}

/// Derives the reading when some spanning tree makes the marking standard: every non-tree
/// edge is the tree loop of a free letter (or its inverse) and every vertex group sits at
/// the end of its tree path.
pub fn standard_reading(g: &Graph, base: usize, m: &Marking) -> Result<Reading> {
    let (ne, nv) = (g.num_edges(), g.num_vertices());
    let k = nv - 1;
    let mut tried = 0usize;
    let mut chosen: Vec<usize> = (0..k).collect();
    let free_red: Vec<Path> = m.free.iter().map(|p| g.reduce(p)).collect();
    loop {
        tried += 1;
        if tried > 20000 {
            break;
        }
        let mut tree = vec![false; ne];
        for &c in &chosen {
            tree[c] = true;
        }
        if let Some(r) = reading_for_tree(g, base, m, &free_red, &tree) {
            return Ok(r);
        }
        // next k-subset in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return Err(no_reading());
            }
            i -= 1;
            if chosen[i] < ne - k + i {
                chosen[i] += 1;
                for j in i + 1..k {
                    chosen[j] = chosen[j - 1] + 1;
                }
                break;
            }
        }
    }
    Err(no_reading())
}

fn no_reading() -> Error {
    Error::InvalidGraph("marking is not standard along any spanning tree; supply a reading".into())
}

fn reading_for_tree(g: &Graph, base: usize, m: &Marking, free_red: &[Path], tree: &[bool]) -> Option<Reading> {
    let fs = &g.fs;
    let (in_tree, paths) = g.tree_paths(base, Some(tree))?;
    if in_tree.iter().zip(tree).any(|(a, b)| a != b) {
        return None;
    }
    let mut edges = Vec::with_capacity(g.num_edges());
    for (i, e) in g.edges.iter().enumerate() {
        if tree[i] {
            edges.push(Word::empty());
            continue;
        }
        let mut gamma = paths[e.from].clone();
        g.push_step(&mut gamma, OEdge::new(i, false), 0);
        g.append(&mut gamma, &g.inverse(&paths[e.to]));
        let inv = g.inverse(&gamma);
        let hit = free_red.iter().enumerate().find_map(|(l, p)| {
            if *p == gamma {
                Some(fs.letter(l))
            } else if *p == inv {
                Some(fs.inverse(&fs.letter(l)))
            } else {
                None
            }
        })?;
        edges.push(hit);
    }
    let mut vertices = vec![None; g.num_vertices()];
    for (i, gm) in m.groups.iter().enumerate() {
        let end = g.path_end(&gm.path);
        if g.reduce(&gm.path) != paths[end] {
            return None;
        }
        let mut inv = vec![0usize; gm.iso.len()];
        for (x, &y) in gm.iso.iter().enumerate() {
            inv[y] = x;
        }
        vertices[end] = Some(VertexReading { conj: Word::empty(), group: i, iso: inv });
    }
    Some(Reading { edges, vertices })
}
