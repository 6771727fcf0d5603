//! Finite graphs of groups with trivial edge groups, decorated paths and cyclic loops.

use std::collections::VecDeque;

use crate::freeprod::Fs;
use crate::group::FiniteGroup;

/// Oriented edge: `2e` forward, `2e+1` reversed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OEdge(pub u32);

impl OEdge {
    pub fn new(e: usize, rev: bool) -> OEdge {
        OEdge(((e as u32) << 1) | rev as u32)
    }

    pub fn edge(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_rev(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inv(self) -> OEdge {
        OEdge(self.0 ^ 1)
    }

    /// The end through which this oriented edge leaves its origin.
    pub fn start_end(self) -> End {
        End { edge: self.edge(), head: self.is_rev() }
    }

    /// The end through which this oriented edge arrives at its terminus.
    pub fn finish_end(self) -> End {
        End { edge: self.edge(), head: !self.is_rev() }
    }
}

/// An edge end; `head` is the terminal end of the edge's forward orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct End {
    pub edge: usize,
    pub head: bool,
}

impl End {
    /// The oriented edge leaving the vertex through this end.
    pub fn leaving(self) -> OEdge {
        OEdge::new(self.edge, self.head)
    }

    pub fn index(self) -> usize {
        2 * self.edge + self.head as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub name: String,
    pub group: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    pub from: usize,
    pub to: usize,
}

/// A decorated edge traversal; `dec` is the vertex-group element applied at the terminus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub edge: OEdge,
    pub dec: usize,
}

/// `init` at `start`, then each step with its trailing decoration.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    pub start: usize,
    pub init: usize,
    pub steps: Vec<Step>,
}

impl Path {
    pub fn trivial(v: usize) -> Path {
        Path { start: v, init: 0, steps: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn final_dec(&self) -> usize {
        self.steps.last().map_or(self.init, |s| s.dec)
    }

    fn final_dec_mut(&mut self) -> &mut usize {
        match self.steps.last_mut() {
            Some(s) => &mut s.dec,
            None => &mut self.init,
        }
    }
}

/// Cyclic loop; the decoration of the last step sits between it and the first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Loop {
    pub steps: Vec<Step>,
}

impl Loop {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Cyclic core of a closed path: an axis or a fixed vertex with its decoration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Core {
    Hyperbolic(Loop),
    Elliptic { vertex: usize, dec: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    pub fs: Fs,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

impl Graph {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn origin(&self, oe: OEdge) -> usize {
        let e = &self.edges[oe.edge()];
        if oe.is_rev() {
            e.to
        } else {
            e.from
        }
    }

    pub fn terminus(&self, oe: OEdge) -> usize {
        self.origin(oe.inv())
    }

    pub fn end_vertex(&self, d: End) -> usize {
        let e = &self.edges[d.edge];
        if d.head {
            e.to
        } else {
            e.from
        }
    }

    /// Ends at v, ordered by edge then tail before head.
    pub fn ends_at(&self, v: usize) -> Vec<End> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.from == v {
                out.push(End { edge: i, head: false });
            }
            if e.to == v {
                out.push(End { edge: i, head: true });
            }
        }
        out
    }

    pub fn valence(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|e| (e.from == v) as usize + (e.to == v) as usize)
            .sum()
    }

    pub fn group_at(&self, v: usize) -> Option<&FiniteGroup> {
        self.vertices[v].group.map(|g| self.fs.group(g))
    }

    /// Order of the vertex group (1 at free vertices).
    pub fn order(&self, v: usize) -> usize {
        self.group_at(v).map_or(1, |g| g.order())
    }

    pub fn is_free(&self, v: usize) -> bool {
        self.vertices[v].group.is_none()
    }

    pub fn dmul(&self, v: usize, a: usize, b: usize) -> usize {
        match self.group_at(v) {
            Some(g) => g.mul(a, b),
            None => {
                debug_assert!(a == 0 && b == 0, "decoration at a free vertex");
                0
            }
        }
    }

    pub fn dinv(&self, v: usize, a: usize) -> usize {
        self.group_at(v).map_or(0, |g| g.inv(a))
    }

    pub fn path_end(&self, p: &Path) -> usize {
        p.steps.last().map_or(p.start, |s| self.terminus(s.edge))
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for e in &self.edges {
                for (a, b) in [(e.from, e.to), (e.to, e.from)] {
                    if a == v && !seen[b] {
                        seen[b] = true;
                        queue.push_back(b);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// BFS spanning tree from `root`: tree edge flags and reduced tree paths root -> v.
    pub fn spanning_tree(&self, root: usize) -> (Vec<bool>, Vec<Path>) {
        self.tree_paths(root, None).expect("connected graph")
    }

    /// Tree paths inside the given edge set; None if it does not reach every vertex.
    pub fn tree_paths(&self, root: usize, tree: Option<&[bool]>) -> Option<(Vec<bool>, Vec<Path>)> {
        let n = self.num_vertices();
        let mut in_tree = vec![false; self.num_edges()];
        let mut paths: Vec<Option<Path>> = vec![None; n];
        paths[root] = Some(Path::trivial(root));
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for (i, e) in self.edges.iter().enumerate() {
                if tree.is_some_and(|t| !t[i]) {
                    continue;
                }
                for rev in [false, true] {
                    let oe = OEdge::new(i, rev);
                    let (a, b) = if rev { (e.to, e.from) } else { (e.from, e.to) };
                    if a == v && paths[b].is_none() {
                        let mut p = paths[v].clone().unwrap();
                        p.steps.push(Step { edge: oe, dec: 0 });
                        paths[b] = Some(p);
                        in_tree[i] = true;
                        queue.push_back(b);
                    }
                }
            }
        }
        let paths = paths.into_iter().collect::<Option<Vec<_>>>()?;
        Some((in_tree, paths))
    }

    /// Appends one step, cancelling a backtrack through a trivial decoration.
    pub fn push_step(&self, p: &mut Path, edge: OEdge, dec: usize) {
        debug_assert_eq!(self.path_end(p), self.origin(edge));
        if let Some(last) = p.steps.last() {
            if last.dec == 0 && last.edge == edge.inv() {
                p.steps.pop();
                let v = self.path_end(p);
                let d = p.final_dec_mut();
                *d = self.dmul(v, *d, dec);
                return;
            }
        }
        p.steps.push(Step { edge, dec });
    }

    pub fn push_dec(&self, p: &mut Path, dec: usize) {
        if dec == 0 {
            return;
        }
        let v = self.path_end(p);
        let d = p.final_dec_mut();
        *d = self.dmul(v, *d, dec);
    }

    pub fn append(&self, p: &mut Path, q: &Path) {
        debug_assert_eq!(self.path_end(p), q.start, "paths do not concatenate");
        self.push_dec(p, q.init);
        for s in &q.steps {
            self.push_step(p, s.edge, s.dec);
        }
    }

    pub fn concat(&self, p: &Path, q: &Path) -> Path {
        let mut r = p.clone();
        self.append(&mut r, q);
        r
    }

    pub fn reduce(&self, p: &Path) -> Path {
        let mut r = Path::trivial(p.start);
        r.init = p.init;
        for s in &p.steps {
            self.push_step(&mut r, s.edge, s.dec);
        }
        r
    }

    pub fn inverse(&self, p: &Path) -> Path {
        let n = p.steps.len();
        let end = self.path_end(p);
        let mut steps = Vec::with_capacity(n);
        for i in (0..n).rev() {
            let before = if i == 0 { p.init } else { p.steps[i - 1].dec };
            let v = self.origin(p.steps[i].edge);
            steps.push(Step { edge: p.steps[i].edge.inv(), dec: self.dinv(v, before) });
        }
        Path { start: end, init: self.dinv(end, p.final_dec()), steps }
    }

    /// Writes a reduced closed path as q . core . q^-1.
    pub fn cyclic_core(&self, p: &Path) -> (Path, Core) {
        let p = self.reduce(p);
        debug_assert_eq!(self.path_end(&p), p.start, "path is not closed");
        let v0 = p.start;
        let mut q = Path { start: v0, init: p.init, steps: Vec::new() };
        if p.steps.is_empty() {
            return (Path::trivial(v0), Core::Elliptic { vertex: v0, dec: p.init });
        }
        let mut cyc = p.steps.clone();
        let last = cyc.len() - 1;
        cyc[last].dec = self.dmul(v0, cyc[last].dec, p.init);
        loop {
            let n = cyc.len();
            if n >= 2 && cyc[0].edge == cyc[n - 1].edge.inv() && cyc[n - 1].dec == 0 {
                let first = cyc[0];
                if n == 2 {
                    self.push_step(&mut q, first.edge, 0);
                    let v = self.terminus(first.edge);
                    return (q, Core::Elliptic { vertex: v, dec: first.dec });
                }
                self.push_step(&mut q, first.edge, first.dec);
                let v = self.terminus(cyc[n - 2].edge);
                let merged = self.dmul(v, cyc[n - 2].dec, first.dec);
                cyc.pop();
                cyc.remove(0);
                let l = cyc.len() - 1;
                cyc[l].dec = merged;
            } else {
                return (q, Core::Hyperbolic(Loop { steps: cyc }));
            }
        }
    }

    pub fn loop_as_path(&self, l: &Loop) -> Path {
        Path { start: self.origin(l.steps[0].edge), init: 0, steps: l.steps.clone() }
    }

    pub fn inverse_loop(&self, l: &Loop) -> Loop {
        let n = l.steps.len();
        let steps = (0..n)
            .rev()
            .map(|k| {
                let prev = l.steps[(k + n - 1) % n];
                let v = self.origin(l.steps[k].edge);
                Step { edge: l.steps[k].edge.inv(), dec: self.dinv(v, prev.dec) }
            })
            .collect();
        Loop { steps }
    }

    /// Lexicographically least rotation of the loop or of its inverse.
    pub fn canonical_loop(&self, l: &Loop) -> Loop {
        let mut best: Option<Vec<Step>> = None;
        for cand in [l.clone(), self.inverse_loop(l)] {
            let n = cand.steps.len();
            for r in 0..n {
                let rot: Vec<Step> =
                    cand.steps[r..].iter().chain(cand.steps[..r].iter()).copied().collect();
                if best.as_ref().map_or(true, |b| rot < *b) {
                    best = Some(rot);
                }
            }
        }
        Loop { steps: best.unwrap_or_default() }
    }

    /// Per-edge crossing counts.
    pub fn shape_of_steps(&self, steps: &[Step]) -> Vec<u32> {
        let mut v = vec![0u32; self.num_edges()];
        for s in steps {
            v[s.edge.edge()] += 1;
        }
        v
    }
}
