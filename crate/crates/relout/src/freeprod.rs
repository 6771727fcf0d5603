//! Normal forms, conjugacy and automorphisms in G = G_1 * ... * G_k * F_r.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::group::FiniteGroup;

/// One syllable of a word. Letters and groups are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Syllable {
    Free { letter: usize, exp: i64 },
    Vertex { group: usize, elem: usize },
}

impl Syllable {
    fn same_factor(&self, o: &Syllable) -> bool {
        match (self, o) {
            (Syllable::Free { letter: a, .. }, Syllable::Free { letter: b, .. }) => a == b,
            (Syllable::Vertex { group: a, .. }, Syllable::Vertex { group: b, .. }) => a == b,
            _ => false,
        }
    }
}

/// A word in normal form when produced by [`FreeFactorSystem`] methods.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Syllable>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn syllable_len(&self) -> usize {
        self.0.len()
    }

    /// Length counting |exponent| for free syllables and 1 for vertex syllables.
    pub fn letter_len(&self) -> usize {
        self.0
            .iter()
            .map(|s| match s {
                Syllable::Free { exp, .. } => exp.unsigned_abs() as usize,
                Syllable::Vertex { .. } => 1,
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeFactorSystem {
    groups: Vec<FiniteGroup>,
    free_rank: usize,
    free_names: Vec<String>,
}

pub type Fs = Arc<FreeFactorSystem>;

impl FreeFactorSystem {
    pub fn new(groups: Vec<FiniteGroup>, free_rank: usize, free_names: Vec<String>) -> Result<Fs> {
        if free_names.len() != free_rank {
            return Err(Error::InvalidSystem("one name per free letter required".into()));
        }
        if groups.len() + free_rank < 2 {
            return Err(Error::InvalidSystem("rank k + r must be at least 2".into()));
        }
        if groups.iter().any(|g| g.order() < 2) {
            return Err(Error::InvalidSystem("vertex groups must be nontrivial".into()));
        }
        let mut names: Vec<&str> = free_names.iter().map(|s| s.as_str()).collect();
        names.extend(groups.iter().map(|g| g.name()));
        for (i, n) in names.iter().enumerate() {
            if !valid_name(n) {
                return Err(Error::InvalidSystem(format!("bad generator name {n:?}")));
            }
            if names[..i].contains(n) {
                return Err(Error::InvalidSystem(format!("duplicate name {n:?}")));
            }
        }
        Ok(Arc::new(FreeFactorSystem { groups, free_rank, free_names }))
    }

    /// Free group of rank r with letters a, b, c, ...
    pub fn free(r: usize) -> Fs {
        let names = (0..r).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
        FreeFactorSystem::new(Vec::new(), r, names).expect("free system")
    }

    pub fn groups(&self) -> &[FiniteGroup] {
        &self.groups
    }

    pub fn group(&self, i: usize) -> &FiniteGroup {
        &self.groups[i]
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn free_names(&self) -> &[String] {
        &self.free_names
    }

    pub fn rank(&self) -> usize {
        self.groups.len() + self.free_rank
    }

    pub fn letter(&self, l: usize) -> Word {
        Word(vec![Syllable::Free { letter: l, exp: 1 }])
    }

    pub fn vertex_elem(&self, group: usize, elem: usize) -> Word {
        if elem == 0 {
            Word::empty()
        } else {
            Word(vec![Syllable::Vertex { group, elem }])
        }
    }

    /// Free letters followed by every nontrivial element of every vertex group.
    pub fn generators(&self) -> Vec<Word> {
        let mut out: Vec<Word> = (0..self.free_rank).map(|l| self.letter(l)).collect();
        for (i, g) in self.groups.iter().enumerate() {
            for x in 1..g.order() {
                out.push(self.vertex_elem(i, x));
            }
        }
        out
    }

    pub fn normalize(&self, raw: &[Syllable]) -> Result<Word> {
        for s in raw {
            match *s {
                Syllable::Free { letter, .. } if letter >= self.free_rank => {
                    return Err(Error::IndexOutOfRange(format!("free letter {letter}")))
                }
                Syllable::Vertex { group, elem } => {
                    if group >= self.groups.len() || elem >= self.groups[group].order() {
                        return Err(Error::IndexOutOfRange(format!("vertex element {group}:{elem}")));
                    }
                }
                _ => {}
            }
        }
        Ok(self.nf(raw.iter().copied()))
    }

    /// Normal form of a sequence already known to be in range.
    pub fn nf(&self, raw: impl IntoIterator<Item = Syllable>) -> Word {
        let mut st: Vec<Syllable> = Vec::new();
        for s in raw {
            let s = match s {
                Syllable::Free { exp: 0, .. } | Syllable::Vertex { elem: 0, .. } => continue,
                s => s,
            };
            match st.last_mut() {
                Some(top) if top.same_factor(&s) => match (top, s) {
                    (Syllable::Free { exp, .. }, Syllable::Free { exp: e2, .. }) => {
                        *exp += e2;
                        if *exp == 0 {
                            st.pop();
                        }
                    }
                    (Syllable::Vertex { group, elem }, Syllable::Vertex { elem: e2, .. }) => {
                        *elem = self.groups[*group].mul(*elem, e2);
                        if *elem == 0 {
                            st.pop();
                        }
                    }
                    _ => unreachable!(),
                },
                _ => st.push(s),
            }
        }
        Word(st)
    }

    pub fn mul(&self, u: &Word, v: &Word) -> Word {
        self.nf(u.0.iter().chain(v.0.iter()).copied())
    }

    pub fn mul_all<'a>(&self, ws: impl IntoIterator<Item = &'a Word>) -> Word {
        self.nf(ws.into_iter().flat_map(|w| w.0.iter().copied()))
    }

    pub fn inverse(&self, w: &Word) -> Word {
        Word(w.0.iter().rev().map(|s| self.inv_syllable(s)).collect())
    }

    fn inv_syllable(&self, s: &Syllable) -> Syllable {
        match *s {
            Syllable::Free { letter, exp } => Syllable::Free { letter, exp: -exp },
            Syllable::Vertex { group, elem } => Syllable::Vertex {
                group,
                elem: self.groups[group].inv(elem),
            },
        }
    }

    pub fn pow(&self, w: &Word, k: i64) -> Word {
        let base = if k < 0 { self.inverse(w) } else { w.clone() };
        let mut raw = Vec::new();
        for _ in 0..k.unsigned_abs() {
            raw.extend(base.0.iter().copied());
        }
        self.nf(raw)
    }

    /// w g w^-1
    pub fn conj(&self, w: &Word, g: &Word) -> Word {
        self.mul_all([w, g, &self.inverse(w)])
    }

    /// Returns (c, core) with g = c core c^-1 and core cyclically reduced.
    pub fn cyclic_reduce(&self, g: &Word) -> (Word, Word) {
        let mut s = g.0.clone();
        let mut lo = 0usize;
        let mut hi = s.len();
        let mut conj = Vec::new();
        while hi - lo >= 2 && s[lo].same_factor(&s[hi - 1]) {
            let first = s[lo];
            let last = s[hi - 1];
            conj.push(first);
            if self.inv_syllable(&first) == last {
                lo += 1;
                hi -= 1;
            } else {
                // g = first M last  ~  M (last first)
                let merged = self.nf([last, first]);
                s[hi - 1] = merged.0[0];
                lo += 1;
                break;
            }
        }
        (self.nf(conj), Word(s[lo..hi].to_vec()))
    }

    pub fn is_hyperbolic(&self, g: &Word) -> bool {
        let (_, core) = self.cyclic_reduce(g);
        match core.0.len() {
            0 => false,
            1 => matches!(core.0[0], Syllable::Free { .. }),
            _ => true,
        }
    }

    /// Some w with h = w g w^-1, if g and h are conjugate.
    pub fn is_conjugate(&self, g: &Word, h: &Word) -> Option<Word> {
        let (cg, kg) = self.cyclic_reduce(g);
        let (ch, kh) = self.cyclic_reduce(h);
        if kg.0.len() != kh.0.len() {
            return None;
        }
        let cg_inv = self.inverse(&cg);
        let candidate = match kg.0.len() {
            0 => Some(Word::empty()),
            1 => match (kg.0[0], kh.0[0]) {
                (Syllable::Vertex { group: a, elem: x }, Syllable::Vertex { group: b, elem: y })
                    if a == b =>
                {
                    let grp = &self.groups[a];
                    (0..grp.order())
                        .find(|&k| grp.conj(k, x) == y)
                        .map(|k| self.mul_all([&ch, &self.vertex_elem(a, k), &cg_inv]))
                }
                (x, y) if x == y => Some(self.mul(&ch, &cg_inv)),
                _ => None,
            },
            n => (0..n).find_map(|j| {
                let rotated: Vec<Syllable> =
                    kg.0[j..].iter().chain(kg.0[..j].iter()).copied().collect();
                (rotated == kh.0).then(|| {
                    let p = Word(kg.0[..j].to_vec());
                    self.mul_all([&ch, &self.inverse(&p), &cg_inv])
                })
            }),
        }?;
        debug_assert_eq!(&self.conj(&candidate, g), h);
        Some(candidate)
    }

    /// A single w with y = w x w^-1 for every pair, where each x is a generator.
    pub fn common_conjugator(&self, pairs: &[(Word, Word)]) -> Option<Word> {
        if pairs.is_empty() {
            return Some(Word::empty());
        }
        let bound: i64 = pairs.iter().map(|(_, y)| y.letter_len() as i64).sum::<i64>() + 2;
        let check = |w: &Word| pairs.iter().all(|(x, y)| &self.conj(w, x) == y);
        let pivot = pairs
            .iter()
            .find(|(x, _)| matches!(x.0.as_slice(), [Syllable::Free { exp: 1, .. }]))
            .or_else(|| pairs.iter().find(|(x, _)| x.0.len() == 1))?;
        let (x, y) = pivot;
        let (c, core) = self.cyclic_reduce(y);
        if core != *x {
            // the core of y must be the generator itself (possibly after a vertex conjugation)
            if let ([Syllable::Vertex { group: a, elem: gx }], [Syllable::Vertex { group: b, elem: gy }]) =
                (x.0.as_slice(), core.0.as_slice())
            {
                if a != b {
                    return None;
                }
                let grp = &self.groups[*a];
                for k in 0..grp.order() {
                    if grp.conj(k, *gx) == *gy {
                        let w = self.mul(&c, &self.vertex_elem(*a, k));
                        if check(&w) {
                            return Some(w);
                        }
                    }
                }
            }
            return None;
        }
        match x.0[0] {
            Syllable::Free { letter, .. } => {
                let mut js: Vec<i64> = (-bound..=bound).collect();
                js.sort_by_key(|j| j.abs());
                js.into_iter().find_map(|j| {
                    let w = self.mul(&c, &Word(vec![Syllable::Free { letter, exp: j }]));
                    let w = self.nf(w.0);
                    check(&w).then_some(w)
                })
            }
            Syllable::Vertex { group, elem } => {
                let grp = &self.groups[group];
                grp.centralizer(elem).into_iter().find_map(|k| {
                    let w = self.mul(&c, &self.vertex_elem(group, k));
                    check(&w).then_some(w)
                })
            }
        }
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(Word::empty());
        }
        let mut raw = Vec::new();
        for tok in s.split_whitespace() {
            raw.push(self.parse_syllable(tok)?);
        }
        self.normalize(&raw)
    }

    fn parse_syllable(&self, tok: &str) -> Result<Syllable> {
        let bad = || Error::Parse(format!("bad syllable {tok:?}"));
        if let Some((name, rest)) = tok.split_once('[') {
            let idx = rest.strip_suffix(']').ok_or_else(bad)?;
            let elem: usize = idx.parse().map_err(|_| bad())?;
            let group = self
                .groups
                .iter()
                .position(|g| g.name() == name)
                .ok_or_else(|| Error::Parse(format!("unknown vertex group {name:?}")))?;
            if elem >= self.groups[group].order() {
                return Err(Error::Parse(format!("element {elem} out of range in {tok:?}")));
            }
            return Ok(Syllable::Vertex { group, elem });
        }
        let (name, exp) = match tok.split_once('^') {
            Some((n, e)) => (n, e.parse::<i64>().map_err(|_| bad())?),
            None => (tok, 1),
        };
        if exp.unsigned_abs() > 1 << 20 {
            return Err(bad());
        }
        let letter = self
            .free_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Parse(format!("unknown free letter {name:?}")))?;
        Ok(Syllable::Free { letter, exp })
    }

    pub fn format_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".into();
        }
        w.0.iter()
            .map(|s| match *s {
                Syllable::Free { letter, exp: 1 } => self.free_names[letter].clone(),
                Syllable::Free { letter, exp } => format!("{}^{}", self.free_names[letter], exp),
                Syllable::Vertex { group, elem } => format!("{}[{}]", self.groups[group].name(), elem),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Random normal-form word with `len` syllables drawn uniformly from the factors.
    pub fn random_word<R: Rng>(&self, rng: &mut R, len: usize, max_exp: i64) -> Word {
        let k = self.rank();
        let mut raw = Vec::with_capacity(len);
        let mut last: Option<usize> = None;
        while raw.len() < len {
            let f = rng.gen_range(0..k);
            if Some(f) == last && k > 1 {
                continue;
            }
            last = Some(f);
            if f < self.free_rank {
                let mut e = rng.gen_range(1..=max_exp.max(1));
                if rng.gen_bool(0.5) {
                    e = -e;
                }
                raw.push(Syllable::Free { letter: f, exp: e });
            } else {
                let g = f - self.free_rank;
                let elem = rng.gen_range(1..self.groups[g].order());
                raw.push(Syllable::Vertex { group: g, elem });
            }
        }
        self.nf(raw)
    }

    /// Invariant of the conjugacy class of g up to inversion: the least rotation of the
    /// cyclically reduced core, written in unit letters, or of its inverse.
    pub fn class_key(&self, g: &Word) -> Vec<Syllable> {
        let (_, core) = self.cyclic_reduce(g);
        let mut atoms: Vec<Syllable> = Vec::new();
        for s in &core.0 {
            match *s {
                Syllable::Free { letter, exp } => {
                    for _ in 0..exp.unsigned_abs() {
                        atoms.push(Syllable::Free { letter, exp: exp.signum() });
                    }
                }
                v => atoms.push(v),
            }
        }
        let rev: Vec<Syllable> = atoms.iter().rev().map(|a| self.inv_syllable(a)).collect();
        let n = atoms.len();
        let mut best = atoms.clone();
        for seq in [&atoms, &rev] {
            for k in 0..n {
                let rot: Vec<Syllable> = seq[k..].iter().chain(&seq[..k]).copied().collect();
                if rot < best {
                    best = rot;
                }
            }
        }
        best
    }

    /// One representative per hyperbolic conjugacy class up to inversion, among cyclic
    /// words of letter length at most `max_len` (a free power a^k counts |k|, a vertex
    /// element counts 1). Representatives are cyclically reduced.
    pub fn cyclic_words(&self, max_len: usize) -> Vec<Word> {
        // atoms: 2l, 2l+1 for a_l^{+1}, a_l^{-1}; then one code per nontrivial vertex element
        let r = self.free_rank;
        let mut atoms: Vec<Syllable> = Vec::new();
        for l in 0..r {
            atoms.push(Syllable::Free { letter: l, exp: 1 });
            atoms.push(Syllable::Free { letter: l, exp: -1 });
        }
        for (i, g) in self.groups.iter().enumerate() {
            for x in 1..g.order() {
                atoms.push(Syllable::Vertex { group: i, elem: x });
            }
        }
        let inv: Vec<usize> = atoms
            .iter()
            .map(|s| {
                let t = self.inv_syllable(s);
                atoms.iter().position(|a| *a == t).expect("closed under inverse")
            })
            .collect();
        let compatible = |a: usize, b: usize| -> bool {
            match (atoms[a], atoms[b]) {
                (Syllable::Free { .. }, Syllable::Free { .. }) => b != inv[a],
                (Syllable::Vertex { group: g, .. }, Syllable::Vertex { group: h, .. }) => g != h,
                _ => true,
            }
        };
        let mut out = Vec::new();
        let mut seq: Vec<usize> = Vec::new();
        fn is_canonical(seq: &[usize], inv: &[usize]) -> bool {
            let n = seq.len();
            let rev: Vec<usize> = seq.iter().rev().map(|&a| inv[a]).collect();
            for s in [seq, &rev[..]] {
                for k in 0..n {
                    let rot = s[k..].iter().chain(&s[..k]);
                    if rot.cmp(seq.iter()) == std::cmp::Ordering::Less {
                        return false;
                    }
                }
            }
            true
        }
        fn rec(
            fs: &FreeFactorSystem,
            atoms: &[Syllable],
            inv: &[usize],
            compatible: &dyn Fn(usize, usize) -> bool,
            seq: &mut Vec<usize>,
            max_len: usize,
            out: &mut Vec<Word>,
        ) {
            if !seq.is_empty() && compatible(*seq.last().unwrap(), seq[0]) && is_canonical(seq, inv) {
                let w = fs.nf(seq.iter().map(|&a| atoms[a]));
                if fs.is_hyperbolic(&w) {
                    out.push(w);
                }
            }
            if seq.len() == max_len {
                return;
            }
            for a in 0..atoms.len() {
                // canonical sequences start with their minimal atom
                if seq.first().is_some_and(|&f| a < f) {
                    continue;
                }
                if seq.last().map_or(true, |&l| compatible(l, a)) {
                    seq.push(a);
                    rec(fs, atoms, inv, compatible, seq, max_len, out);
                    seq.pop();
                }
            }
        }
        rec(self, &atoms, &inv, &compatible, &mut seq, max_len, &mut out);
        out
    }
}

fn valid_name(n: &str) -> bool {
    !n.is_empty()
        && n.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Image of one vertex group: g -> conj [target, iso(g)] conj^-1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexImage {
    pub conj: Word,
    pub target: usize,
    pub iso: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutImages {
    pub free: Vec<Word>,
    pub groups: Vec<VertexImage>,
}

impl AutImages {
    pub fn identity(fs: &FreeFactorSystem) -> AutImages {
        AutImages {
            free: (0..fs.free_rank()).map(|l| fs.letter(l)).collect(),
            groups: (0..fs.num_groups())
                .map(|i| VertexImage {
                    conj: Word::empty(),
                    target: i,
                    iso: (0..fs.group(i).order()).collect(),
                })
                .collect(),
        }
    }

    pub fn apply(&self, fs: &FreeFactorSystem, g: &Word) -> Word {
        let mut raw: Vec<Syllable> = Vec::new();
        for s in &g.0 {
            match *s {
                Syllable::Free { letter, exp } => {
                    let img = &self.free[letter];
                    if exp > 0 {
                        for _ in 0..exp {
                            raw.extend(img.0.iter().copied());
                        }
                    } else {
                        let inv = fs.inverse(img);
                        for _ in 0..(-exp) {
                            raw.extend(inv.0.iter().copied());
                        }
                    }
                }
                Syllable::Vertex { group, elem } => {
                    let vi = &self.groups[group];
                    raw.extend(vi.conj.0.iter().copied());
                    raw.push(Syllable::Vertex { group: vi.target, elem: vi.iso[elem] });
                    raw.extend(fs.inverse(&vi.conj).0);
                }
            }
        }
        fs.nf(raw)
    }

    /// self o other.
    pub fn compose(&self, fs: &FreeFactorSystem, other: &AutImages) -> AutImages {
        AutImages {
            free: other.free.iter().map(|w| self.apply(fs, w)).collect(),
            groups: other
                .groups
                .iter()
                .map(|vo| {
                    let vs = &self.groups[vo.target];
                    VertexImage {
                        conj: fs.mul(&self.apply(fs, &vo.conj), &vs.conj),
                        target: vs.target,
                        iso: vo.iso.iter().map(|&x| vs.iso[x]).collect(),
                    }
                })
                .collect(),
        }
    }

    fn check_shape(&self, fs: &FreeFactorSystem) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSystem(m));
        if self.free.len() != fs.free_rank() || self.groups.len() != fs.num_groups() {
            return bad("wrong number of generator images".into());
        }
        let mut hit = vec![false; fs.num_groups()];
        for (i, vi) in self.groups.iter().enumerate() {
            if vi.target >= fs.num_groups() {
                return bad(format!("vertex group {i} maps to unknown group"));
            }
            if std::mem::replace(&mut hit[vi.target], true) {
                return bad("vertex group images are not a permutation".into());
            }
            if !fs.group(i).is_isomorphism(fs.group(vi.target), &vi.iso) {
                return bad(format!("vertex group {i}: map is not an isomorphism"));
            }
        }
        Ok(())
    }

    /// True when self acts on generators as one conjugation; returns the conjugator.
    pub fn inner_conjugator(&self, fs: &FreeFactorSystem) -> Option<Word> {
        let pairs: Vec<(Word, Word)> = fs
            .generators()
            .into_iter()
            .map(|x| {
                let y = self.apply(fs, &x);
                (x, y)
            })
            .collect();
        fs.common_conjugator(&pairs)
    }
}

/// Automorphism preserving the vertex groups up to conjugacy, with verified inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FPAutomorphism {
    fs: Fs,
    forward: AutImages,
    inverse: AutImages,
}

impl FPAutomorphism {
    pub fn new(fs: Fs, forward: AutImages, inverse: AutImages) -> Result<Self> {
        forward.check_shape(&fs)?;
        inverse.check_shape(&fs)?;
        let a = FPAutomorphism { fs, forward, inverse };
        a.verify()?;
        Ok(a)
    }

    fn verify(&self) -> Result<()> {
        let fs = &self.fs;
        for (name, comp) in [
            ("forward o inverse", self.forward.compose(fs, &self.inverse)),
            ("inverse o forward", self.inverse.compose(fs, &self.forward)),
        ] {
            if comp.inner_conjugator(fs).is_none() {
                return Err(Error::UnverifiedInverse(format!("{name} is not inner")));
            }
        }
        Ok(())
    }

    pub fn identity(fs: Fs) -> Self {
        let id = AutImages::identity(&fs);
        FPAutomorphism { fs, forward: id.clone(), inverse: id }
    }

    /// Conjugation g -> w g w^-1.
    pub fn inner(fs: Fs, w: &Word) -> Self {
        let mk = |w: &Word| AutImages {
            free: (0..fs.free_rank()).map(|l| fs.conj(w, &fs.letter(l))).collect(),
            groups: (0..fs.num_groups())
                .map(|i| VertexImage {
                    conj: w.clone(),
                    target: i,
                    iso: (0..fs.group(i).order()).collect(),
                })
                .collect(),
        };
        let fwd = mk(w);
        let inv = mk(&fs.inverse(w));
        FPAutomorphism { fs, forward: fwd, inverse: inv }
    }

    pub fn fs(&self) -> &Fs {
        &self.fs
    }

    pub fn forward(&self) -> &AutImages {
        &self.forward
    }

    pub fn inverse_images(&self) -> &AutImages {
        &self.inverse
    }

    pub fn apply(&self, g: &Word) -> Word {
        self.forward.apply(&self.fs, g)
    }

    pub fn apply_inverse(&self, g: &Word) -> Word {
        self.inverse.apply(&self.fs, g)
    }

    /// self o other
    pub fn compose(&self, other: &FPAutomorphism) -> FPAutomorphism {
        FPAutomorphism {
            fs: self.fs.clone(),
            forward: self.forward.compose(&self.fs, &other.forward),
            inverse: other.inverse.compose(&self.fs, &self.inverse),
        }
    }

    pub fn invert(&self) -> FPAutomorphism {
        FPAutomorphism {
            fs: self.fs.clone(),
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    pub fn pow(&self, k: i64) -> FPAutomorphism {
        let base = if k < 0 { self.invert() } else { self.clone() };
        let mut r = FPAutomorphism::identity(self.fs.clone());
        for _ in 0..k.unsigned_abs() {
            r = base.compose(&r);
        }
        r
    }

    /// Conjugator w when this automorphism is inner.
    pub fn is_inner(&self) -> Option<Word> {
        self.forward.inner_conjugator(&self.fs)
    }
}

impl fmt::Display for FPAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fs = &self.fs;
        let parts: Vec<String> = (0..fs.free_rank())
            .map(|l| format!("{} -> {}", fs.free_names()[l], fs.format_word(&self.forward.free[l])))
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2f1() -> Fs {
        FreeFactorSystem::new(vec![FiniteGroup::cyclic("g", 2)], 1, vec!["a".into()]).unwrap()
    }

    #[test]
    fn normal_forms() {
        let fs = FreeFactorSystem::free(2);
        assert!(fs.parse_word("a a^-1").unwrap().is_empty());
        assert_eq!(fs.format_word(&fs.parse_word("a b b^-1 a").unwrap()), "a^2");
        let z = z2f1();
        assert!(z.parse_word("g[1] g[1]").unwrap().is_empty());
        assert!(fs.normalize(&[Syllable::Free { letter: 5, exp: 1 }]).is_err());
    }

    #[test]
    fn cyclic_reduction_examples() {
        let fs = FreeFactorSystem::free(2);
        let w = |s: &str| fs.parse_word(s).unwrap();
        assert_eq!(fs.cyclic_reduce(&w("a b a^-1")), (w("a"), w("b")));
        assert_eq!(fs.cyclic_reduce(&w("b a b")), (w("b"), w("a b^2")));
        assert_eq!(fs.cyclic_reduce(&w("a b a b^-1 a^-1")), (w("a b"), w("a")));
        assert_eq!(fs.cyclic_reduce(&w("b a")), (Word::empty(), w("b a")));
    }

    #[test]
    fn hyperbolicity() {
        let z = z2f1();
        let w = |s: &str| z.parse_word(s).unwrap();
        assert!(!z.is_hyperbolic(&w("g[1]")));
        assert!(z.is_hyperbolic(&w("a")));
        assert!(z.is_hyperbolic(&w("g[1] a g[1] a^-1")));
        assert!(!z.is_hyperbolic(&w("a g[1] a^-1")));
    }

    #[test]
    fn conjugacy_examples() {
        let fs = FreeFactorSystem::free(2);
        let w = |s: &str| fs.parse_word(s).unwrap();
        let c = fs.is_conjugate(&w("a b"), &w("b a")).unwrap();
        assert_eq!(fs.conj(&c, &w("a b")), w("b a"));
        assert!(fs.is_conjugate(&w("a"), &w("b")).is_none());
        let z = z2f1();
        let g = z.parse_word("g[1] a").unwrap();
        let h = z.parse_word("a g[1]").unwrap();
        let c = z.is_conjugate(&g, &h).unwrap();
        assert_eq!(z.conj(&c, &g), h);
        assert!(z.is_conjugate(&z.parse_word("g[1]").unwrap(), &g).is_none());
    }

    fn fib() -> FPAutomorphism {
        let fs = FreeFactorSystem::free(2);
        let w = |s: &str| fs.parse_word(s).unwrap();
        FPAutomorphism::new(
            fs.clone(),
            AutImages { free: vec![w("b"), w("a b")], groups: vec![] },
            AutImages { free: vec![w("b a^-1"), w("a")], groups: vec![] },
        )
        .unwrap()
    }

    #[test]
    fn fibonacci_substitution() {
        let phi = fib();
        let fs = phi.fs().clone();
        let w = |s: &str| fs.parse_word(s).unwrap();
        assert_eq!(phi.apply(&w("a b")), w("b a b"));
        assert_eq!(phi.apply(&phi.apply_inverse(&w("a"))), w("a"));
        assert_eq!(phi.pow(2).apply(&w("a")), w("a b"));
        assert!(phi.compose(&phi.invert()).is_inner().is_some());
        assert!(phi.is_inner().is_none());
    }

    #[test]
    fn wrong_inverse_rejected() {
        let fs = FreeFactorSystem::free(2);
        let w = |s: &str| fs.parse_word(s).unwrap();
        let r = FPAutomorphism::new(
            fs.clone(),
            AutImages { free: vec![w("b"), w("a b")], groups: vec![] },
            AutImages { free: vec![w("a"), w("b")], groups: vec![] },
        );
        assert!(matches!(r, Err(Error::UnverifiedInverse(_))));
    }

    #[test]
    fn inner_automorphisms_detected() {
        let z = z2f1();
        let w = z.parse_word("a g[1] a^2").unwrap();
        let ad = FPAutomorphism::inner(z.clone(), &w);
        let c = ad.is_inner().unwrap();
        for x in z.generators() {
            assert_eq!(z.conj(&c, &x), ad.apply(&x));
        }
    }
}
