//! JSON fixtures: a free factor system, named points and named automorphisms.
//!
//! Paths are written as whitespace-separated tokens starting at the base: `e` crosses edge
//! `e` forward, `-e` backward, `[k]` applies element `k` of the current vertex group.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::freeprod::{AutImages, FPAutomorphism, FreeFactorSystem, Fs, VertexImage, Word};
use crate::graph::{Edge, Graph, OEdge, Path, Vertex};
use crate::group::FiniteGroup;
use crate::marked_graph::{GroupMark, MarkedGraph, Marking, Reading, VertexReading};
use crate::rational::{fmt_q, parse_q};

const MAX_WORD: usize = 4096;
const MAX_FREE_RANK: usize = 26;
const MAX_GROUPS: usize = 16;
const MAX_EDGES: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFixture {
    pub name: String,
    pub factors: RawFactors,
    #[serde(default)]
    pub points: BTreeMap<String, RawPoint>,
    #[serde(default)]
    pub automorphisms: BTreeMap<String, RawAut>,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFactors {
    pub free_rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_names: Option<Vec<String>>,
    #[serde(default)]
    pub vertex_groups: Vec<RawGroup>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGroup {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cyclic: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPoint {
    pub vertices: Vec<RawVertex>,
    pub edges: Vec<RawEdge>,
    pub base: String,
    pub marking: RawMarking,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reading: Option<RawReading>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawVertex {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEdge {
    pub name: String,
    pub from: String,
    pub to: String,
    pub length: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMarking {
    #[serde(default)]
    pub free: BTreeMap<String, String>,
    #[serde(default)]
    pub groups: BTreeMap<String, RawGroupMark>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGroupMark {
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iso: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawReading {
    pub edges: BTreeMap<String, String>,
    #[serde(default)]
    pub vertices: BTreeMap<String, RawVertexReading>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawVertexReading {
    #[serde(default)]
    pub conj: String,
    pub group: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iso: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAut {
    pub forward: RawImages,
    pub inverse: RawImages,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawImages {
    #[serde(default)]
    pub free: BTreeMap<String, String>,
    #[serde(default)]
    pub groups: BTreeMap<String, RawVertexImage>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawVertexImage {
    #[serde(default)]
    pub conj: String,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iso: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub name: String,
    pub fs: Fs,
    pub points: BTreeMap<String, MarkedGraph>,
    pub automorphisms: BTreeMap<String, FPAutomorphism>,
    pub params: BTreeMap<String, serde_json::Value>,
    /// sha256 of the source text.
    pub hash: String,
}

impl Fixture {
    pub fn point(&self, name: &str) -> Result<&MarkedGraph> {
        self.points
            .get(name)
            .ok_or_else(|| Error::Parse(format!("fixture {} has no point {name:?}", self.name)))
    }

    pub fn automorphism(&self, name: &str) -> Result<&FPAutomorphism> {
        self.automorphisms
            .get(name)
            .ok_or_else(|| Error::Parse(format!("fixture {} has no automorphism {name:?}", self.name)))
    }

    pub fn to_raw(&self) -> RawFixture {
        RawFixture {
            name: self.name.clone(),
            factors: factors_to_raw(&self.fs),
            points: self.points.iter().map(|(k, x)| (k.clone(), point_to_raw(x))).collect(),
            automorphisms: self
                .automorphisms
                .iter()
                .map(|(k, a)| {
                    let raw = RawAut {
                        forward: images_to_raw(&self.fs, a.forward()),
                        inverse: images_to_raw(&self.fs, a.inverse_images()),
                    };
                    (k.clone(), raw)
                })
                .collect(),
            params: self.params.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("serializable")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Parses and validates a fixture. Never panics on malformed input.
pub fn parse_fixture(src: &str) -> Result<Fixture> {
    let raw: RawFixture =
        serde_json::from_str(src).map_err(|e| Error::Parse(format!("fixture JSON: {e}")))?;
    let mut fx = from_raw(&raw)?;
    fx.hash = sha256_hex(src.as_bytes());
    Ok(fx)
}

pub fn from_raw(raw: &RawFixture) -> Result<Fixture> {
    let fs = factors_from_raw(&raw.factors)?;
    let mut points = BTreeMap::new();
    for (name, p) in &raw.points {
        let x = point_from_raw(&fs, p).map_err(|e| Error::Parse(format!("point {name}: {e}")))?;
        points.insert(name.clone(), x);
    }
    let mut automorphisms = BTreeMap::new();
    for (name, a) in &raw.automorphisms {
        let fwd = images_from_raw(&fs, &a.forward)?;
        let inv = images_from_raw(&fs, &a.inverse)?;
        let phi = FPAutomorphism::new(fs.clone(), fwd, inv)
            .map_err(|e| Error::Parse(format!("automorphism {name}: {e}")))?;
        automorphisms.insert(name.clone(), phi);
    }
    Ok(Fixture {
        name: raw.name.clone(),
        fs,
        points,
        automorphisms,
        params: raw.params.clone(),
        hash: String::new(),
    })
}

pub fn factors_from_raw(f: &RawFactors) -> Result<Fs> {
    if f.free_rank > MAX_FREE_RANK || f.vertex_groups.len() > MAX_GROUPS {
        return Err(Error::Parse("free factor system too large".into()));
    }
    let names = match &f.free_names {
        Some(n) => n.clone(),
        None => (0..f.free_rank).map(|i| ((b'a' + i as u8) as char).to_string()).collect(),
    };
    let mut groups = Vec::new();
    for g in &f.vertex_groups {
        let grp = match (&g.cyclic, &g.table) {
            (Some(n), None) if (1..=64).contains(n) => FiniteGroup::cyclic(g.name.clone(), *n),
            (None, Some(t)) => FiniteGroup::new(g.name.clone(), t.clone())?,
            _ => return Err(Error::Parse(format!("group {}: give either cyclic (<= 64) or table", g.name))),
        };
        groups.push(grp);
    }
    FreeFactorSystem::new(groups, f.free_rank, names)
}

pub fn factors_to_raw(fs: &FreeFactorSystem) -> RawFactors {
    RawFactors {
        free_rank: fs.free_rank(),
        free_names: Some(fs.free_names().to_vec()),
        vertex_groups: fs
            .groups()
            .iter()
            .map(|g| RawGroup { name: g.name().to_string(), cyclic: None, table: Some(g.table().to_vec()) })
            .collect(),
    }
}

fn group_index(fs: &FreeFactorSystem, name: &str) -> Result<usize> {
    fs.groups()
        .iter()
        .position(|g| g.name() == name)
        .ok_or_else(|| Error::Parse(format!("unknown vertex group {name:?}")))
}

fn letter_index(fs: &FreeFactorSystem, name: &str) -> Result<usize> {
    fs.free_names()
        .iter()
        .position(|g| g == name)
        .ok_or_else(|| Error::Parse(format!("unknown free letter {name:?}")))
}

/// Parses a word, rejecting inputs whose expansion is unreasonably long.
pub fn parse_word_bounded(fs: &FreeFactorSystem, s: &str) -> Result<Word> {
    let w = fs.parse_word(s)?;
    if w.letter_len() > MAX_WORD {
        return Err(Error::Parse("word too long".into()));
    }
    Ok(w)
}

/// Parses a decorated path starting at `start` in `g`.
pub fn parse_path(g: &Graph, start: usize, s: &str) -> Result<Path> {
    let mut p = Path::trivial(start);
    let mut at = start;
    let s = s.trim();
    if s.is_empty() || s == "1" {
        return Ok(p);
    }
    for tok in s.split_whitespace() {
        if let Some(k) = tok.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
            let k: usize = k.parse().map_err(|_| Error::Parse(format!("bad decoration {tok:?}")))?;
            if k >= g.order(at) {
                return Err(Error::Parse(format!("decoration {tok:?} out of range at {}", g.vertices[at].name)));
            }
            let d = match p.steps.last_mut() {
                Some(st) => &mut st.dec,
                None => &mut p.init,
            };
            *d = g.dmul(at, *d, k);
            continue;
        }
        let (rev, name) = match tok.strip_prefix('-') {
            Some(n) => (true, n),
            None => (false, tok),
        };
        let e = g
            .edges
            .iter()
            .position(|e| e.name == name)
            .ok_or_else(|| Error::Parse(format!("unknown edge {name:?}")))?;
        let oe = OEdge::new(e, rev);
        if g.origin(oe) != at {
            return Err(Error::Parse(format!("path does not join up at {tok:?}")));
        }
        p.steps.push(crate::graph::Step { edge: oe, dec: 0 });
        at = g.terminus(oe);
        if p.steps.len() > MAX_WORD {
            return Err(Error::Parse("path too long".into()));
        }
    }
    Ok(p)
}

pub fn format_path(g: &Graph, p: &Path) -> String {
    let mut toks = Vec::new();
    if p.init != 0 {
        toks.push(format!("[{}]", p.init));
    }
    for s in &p.steps {
        let name = &g.edges[s.edge.edge()].name;
        toks.push(if s.edge.is_rev() { format!("-{name}") } else { name.clone() });
        if s.dec != 0 {
            toks.push(format!("[{}]", s.dec));
        }
    }
    if toks.is_empty() {
        "1".into()
    } else {
        toks.join(" ")
    }
}

fn valid_iso(fs: &FreeFactorSystem, from: usize, to: usize, iso: &Option<Vec<usize>>) -> Result<Vec<usize>> {
    let n = fs.group(from).order();
    let iso = iso.clone().unwrap_or_else(|| (0..n).collect());
    if !fs.group(from).is_isomorphism(fs.group(to), &iso) {
        return Err(Error::Parse(format!(
            "{} -> {}: map is not an isomorphism",
            fs.group(from).name(),
            fs.group(to).name()
        )));
    }
    Ok(iso)
}

pub fn point_from_raw(fs: &Fs, p: &RawPoint) -> Result<MarkedGraph> {
    if p.edges.len() > MAX_EDGES || p.vertices.len() > MAX_EDGES {
        return Err(Error::Parse("graph too large".into()));
    }
    let vidx = |n: &str| {
        p.vertices
            .iter()
            .position(|v| v.name == n)
            .ok_or_else(|| Error::Parse(format!("unknown vertex {n:?}")))
    };
    let mut vertices = Vec::new();
    for (i, v) in p.vertices.iter().enumerate() {
        if p.vertices[..i].iter().any(|w| w.name == v.name) {
            return Err(Error::Parse(format!("duplicate vertex {:?}", v.name)));
        }
        let group = v.group.as_deref().map(|g| group_index(fs, g)).transpose()?;
        vertices.push(Vertex { name: v.name.clone(), group });
    }
    let mut edges = Vec::new();
    let mut lengths = Vec::new();
    for (i, e) in p.edges.iter().enumerate() {
        if e.name.is_empty() || e.name.starts_with(['-', '[']) || e.name.contains(char::is_whitespace) {
            return Err(Error::Parse(format!("bad edge name {:?}", e.name)));
        }
        if p.edges[..i].iter().any(|f| f.name == e.name) {
            return Err(Error::Parse(format!("duplicate edge {:?}", e.name)));
        }
        edges.push(Edge { name: e.name.clone(), from: vidx(&e.from)?, to: vidx(&e.to)? });
        lengths.push(parse_q(&e.length)?);
    }
    let graph = Graph { fs: fs.clone(), vertices, edges };
    let base = vidx(&p.base)?;
    let mut free = vec![None; fs.free_rank()];
    for (l, s) in &p.marking.free {
        free[letter_index(fs, l)?] = Some(parse_path(&graph, base, s)?);
    }
    let free = free
        .into_iter()
        .enumerate()
        .map(|(l, x)| x.ok_or_else(|| Error::Parse(format!("no marking for {}", fs.free_names()[l]))))
        .collect::<Result<Vec<_>>>()?;
    let mut groups = vec![None; fs.num_groups()];
    for (name, gm) in &p.marking.groups {
        let i = group_index(fs, name)?;
        let path = parse_path(&graph, base, &gm.path)?;
        let end = graph.path_end(&path);
        let Some(j) = graph.vertices[end].group else {
            return Err(Error::Parse(format!("path for {name} ends at a free vertex")));
        };
        let iso = valid_iso(fs, i, j, &gm.iso)?;
        groups[i] = Some(GroupMark { path, iso });
    }
    let groups = groups
        .into_iter()
        .enumerate()
        .map(|(i, x)| x.ok_or_else(|| Error::Parse(format!("no marking for {}", fs.group(i).name()))))
        .collect::<Result<Vec<_>>>()?;
    let reading = match &p.reading {
        None => None,
        Some(r) => {
            let mut edges = vec![None; graph.num_edges()];
            for (e, w) in &r.edges {
                let i = graph
                    .edges
                    .iter()
                    .position(|x| &x.name == e)
                    .ok_or_else(|| Error::Parse(format!("unknown edge {e:?}")))?;
                edges[i] = Some(parse_word_bounded(fs, w)?);
            }
            let edges = edges
                .into_iter()
                .map(|x| x.ok_or_else(|| Error::Parse("reading must label every edge".into())))
                .collect::<Result<Vec<_>>>()?;
            let mut vertices = vec![None; graph.num_vertices()];
            for (v, vr) in &r.vertices {
                let i = vidx(v)?;
                let Some(j) = graph.vertices[i].group else {
                    return Err(Error::Parse(format!("reading for free vertex {v:?}")));
                };
                let target = group_index(fs, &vr.group)?;
                vertices[i] = Some(VertexReading {
                    conj: parse_word_bounded(fs, &vr.conj)?,
                    group: target,
                    iso: valid_iso(fs, j, target, &vr.iso)?,
                });
            }
            Some(Reading { edges, vertices })
        }
    };
    MarkedGraph::new(graph, lengths, base, Marking { free, groups }, reading)
}

pub fn point_to_raw(x: &MarkedGraph) -> RawPoint {
    let g = &*x.graph;
    let fs = x.fs();
    let vname = |v: usize| g.vertices[v].name.clone();
    let ident = |iso: &[usize]| iso.iter().enumerate().all(|(i, &y)| i == y);
    RawPoint {
        vertices: g
            .vertices
            .iter()
            .map(|v| RawVertex { name: v.name.clone(), group: v.group.map(|i| fs.group(i).name().to_string()) })
            .collect(),
        edges: g
            .edges
            .iter()
            .zip(&x.lengths)
            .map(|(e, l)| RawEdge { name: e.name.clone(), from: vname(e.from), to: vname(e.to), length: fmt_q(l) })
            .collect(),
        base: vname(x.base),
        marking: RawMarking {
            free: x
                .marking
                .free
                .iter()
                .enumerate()
                .map(|(l, p)| (fs.free_names()[l].clone(), format_path(g, p)))
                .collect(),
            groups: x
                .marking
                .groups
                .iter()
                .enumerate()
                .map(|(i, gm)| {
                    let iso = (!ident(&gm.iso)).then(|| gm.iso.clone());
                    (fs.group(i).name().to_string(), RawGroupMark { path: format_path(g, &gm.path), iso })
                })
                .collect(),
        },
        reading: Some(RawReading {
            edges: g
                .edges
                .iter()
                .zip(&x.reading.edges)
                .map(|(e, w)| (e.name.clone(), fs.format_word(w)))
                .collect(),
            vertices: x
                .reading
                .vertices
                .iter()
                .enumerate()
                .filter_map(|(v, vr)| {
                    let vr = vr.as_ref()?;
                    let iso = (!ident(&vr.iso)).then(|| vr.iso.clone());
                    let raw = RawVertexReading {
                        conj: fs.format_word(&vr.conj),
                        group: fs.group(vr.group).name().to_string(),
                        iso,
                    };
                    Some((vname(v), raw))
                })
                .collect(),
        }),
    }
}

pub fn images_from_raw(fs: &Fs, r: &RawImages) -> Result<AutImages> {
    let mut out = AutImages::identity(fs);
    let mut seen_free = vec![false; fs.free_rank()];
    for (l, w) in &r.free {
        let i = letter_index(fs, l)?;
        seen_free[i] = true;
        out.free[i] = parse_word_bounded(fs, w)?;
    }
    if seen_free.iter().any(|s| !s) {
        return Err(Error::Parse("automorphism must give every free letter an image".into()));
    }
    for (name, vi) in &r.groups {
        let i = group_index(fs, name)?;
        let target = group_index(fs, &vi.target)?;
        out.groups[i] = VertexImage {
            conj: parse_word_bounded(fs, &vi.conj)?,
            target,
            iso: valid_iso(fs, i, target, &vi.iso)?,
        };
    }
    Ok(out)
}

pub fn images_to_raw(fs: &FreeFactorSystem, a: &AutImages) -> RawImages {
    RawImages {
        free: a
            .free
            .iter()
            .enumerate()
            .map(|(l, w)| (fs.free_names()[l].clone(), fs.format_word(w)))
            .collect(),
        groups: a
            .groups
            .iter()
            .enumerate()
            .map(|(i, vi)| {
                let ident = vi.iso.iter().enumerate().all(|(k, &y)| k == y);
                let raw = RawVertexImage {
                    conj: fs.format_word(&vi.conj),
                    target: fs.group(vi.target).name().to_string(),
                    iso: (!ident).then(|| vi.iso.clone()),
                };
                (fs.group(i).name().to_string(), raw)
            })
            .collect(),
    }
}

/// Bundled fixtures by name.
pub fn bundled(name: &str) -> Option<&'static str> {
    let src = match name {
        "FIB" => include_str!("../fixtures/fib.json"),
        "FIB_INV" => include_str!("../fixtures/fib_inv.json"),
        "LOLLI" => include_str!("../fixtures/lolli.json"),
        "SWAP" => include_str!("../fixtures/swap.json"),
        "FLIP" => include_str!("../fixtures/flip.json"),
        "W3" => include_str!("../fixtures/w3.json"),
        _ => return None,
    };
    Some(src)
}

pub const BUNDLED: [&str; 6] = ["FIB", "FIB_INV", "LOLLI", "SWAP", "FLIP", "W3"];

pub fn load_bundled(name: &str) -> Result<Fixture> {
    let src = bundled(name).ok_or_else(|| Error::Parse(format!("no bundled fixture {name:?}")))?;
    parse_fixture(src)
}
