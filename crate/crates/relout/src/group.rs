//! Finite groups given by multiplication tables; element 0 is the identity.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    table: Vec<Vec<usize>>,
    inv: Vec<usize>,
}

impl FiniteGroup {
    /// Checks closure, identity at 0, inverses and associativity exhaustively.
    pub fn new(name: impl Into<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let name = name.into();
        let n = table.len();
        let bad = |m: &str| Error::NotAGroup(format!("{name}: {m}"));
        if n == 0 || n > 64 {
            return Err(bad("order must be between 1 and 64"));
        }
        if table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(bad("table is not square over its elements"));
        }
        for a in 0..n {
            if table[0][a] != a || table[a][0] != a {
                return Err(bad("element 0 is not the identity"));
            }
        }
        let mut inv = vec![usize::MAX; n];
        for a in 0..n {
            match (0..n).find(|&b| table[a][b] == 0) {
                Some(b) if table[b][a] == 0 => inv[a] = b,
                _ => return Err(bad("missing inverse")),
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(bad("not associative"));
                    }
                }
            }
        }
        Ok(FiniteGroup { name, table, inv })
    }

    pub fn cyclic(name: impl Into<String>, n: usize) -> Self {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        FiniteGroup::new(name, table).expect("cyclic table")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn conj(&self, c: usize, g: usize) -> usize {
        self.mul(self.mul(c, g), self.inv(c))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn is_homomorphism(&self, other: &FiniteGroup, map: &[usize]) -> bool {
        map.len() == self.order()
            && map.iter().all(|&x| x < other.order())
            && (0..self.order()).all(|a| {
                (0..self.order()).all(|b| map[self.mul(a, b)] == other.mul(map[a], map[b]))
            })
    }

    pub fn is_isomorphism(&self, other: &FiniteGroup, map: &[usize]) -> bool {
        if self.order() != other.order() || !self.is_homomorphism(other, map) {
            return false;
        }
        let mut seen = vec![false; other.order()];
        map.iter().all(|&x| !std::mem::replace(&mut seen[x], true))
    }

    /// A small generating set, chosen greedily.
    pub fn generators(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut span = vec![0usize];
        let mut inside = vec![false; self.order()];
        inside[0] = true;
        for g in 1..self.order() {
            if inside[g] {
                continue;
            }
            gens.push(g);
            let mut i = 0;
            while i < span.len() {
                for &h in gens.iter() {
                    let x = self.mul(span[i], h);
                    if !inside[x] {
                        inside[x] = true;
                        span.push(x);
                    }
                }
                i += 1;
            }
        }
        gens
    }

    /// All isomorphisms self -> other as element maps.
    pub fn isomorphisms_to(&self, other: &FiniteGroup) -> Vec<Vec<usize>> {
        if self.order() != other.order() {
            return Vec::new();
        }
        let gens = self.generators();
        let mut out = Vec::new();
        let mut choice = vec![0usize; gens.len()];
        self.iso_search(other, &gens, 0, &mut choice, &mut out);
        out
    }

    fn iso_search(
        &self,
        other: &FiniteGroup,
        gens: &[usize],
        i: usize,
        choice: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if i == gens.len() {
            if let Some(map) = self.extend(other, gens, choice) {
                if self.is_isomorphism(other, &map) {
                    out.push(map);
                }
            }
            return;
        }
        let ord = self.element_order(gens[i]);
        for t in 0..other.order() {
            if other.element_order(t) == ord {
                choice[i] = t;
                self.iso_search(other, gens, i + 1, choice, out);
            }
        }
    }

    fn extend(&self, other: &FiniteGroup, gens: &[usize], imgs: &[usize]) -> Option<Vec<usize>> {
        let mut map = vec![usize::MAX; self.order()];
        map[0] = 0;
        let mut queue = vec![0usize];
        let mut i = 0;
        while i < queue.len() {
            let x = queue[i];
            i += 1;
            for (&g, &t) in gens.iter().zip(imgs) {
                let y = self.mul(x, g);
                let img = other.mul(map[x], t);
                if map[y] == usize::MAX {
                    map[y] = img;
                    queue.push(y);
                } else if map[y] != img {
                    return None;
                }
            }
        }
        Some(map)
    }

    pub fn centralizer(&self, g: usize) -> Vec<usize> {
        (0..self.order())
            .filter(|&c| self.mul(c, g) == self.mul(g, c))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s3() -> FiniteGroup {
        // permutations of {0,1,2} in a fixed order, composition (a*b)(x) = a(b(x))
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [1, 0, 2],
            [0, 2, 1],
            [2, 1, 0],
            [1, 2, 0],
            [2, 0, 1],
        ];
        let idx = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
        let table = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| idx([a[b[0]], a[b[1]], a[b[2]]]))
                    .collect()
            })
            .collect();
        FiniteGroup::new("S3", table).unwrap()
    }

    #[test]
    fn validates_tables() {
        assert!(FiniteGroup::new("bad", vec![vec![0, 1], vec![1, 1]]).is_err());
        assert!(FiniteGroup::new("z2", vec![vec![0, 1], vec![1, 0]]).is_ok());
        assert_eq!(s3().order(), 6);
    }

    #[test]
    fn automorphism_counts() {
        // |Aut(Z/3)| = 2, |Aut(Z/4)| = 2, |Aut(S3)| = 6, |Aut(Z/5)| = 4
        assert_eq!(FiniteGroup::cyclic("c3", 3).isomorphisms_to(&FiniteGroup::cyclic("c3", 3)).len(), 2);
        assert_eq!(FiniteGroup::cyclic("c4", 4).isomorphisms_to(&FiniteGroup::cyclic("c4", 4)).len(), 2);
        assert_eq!(FiniteGroup::cyclic("c5", 5).isomorphisms_to(&FiniteGroup::cyclic("c5", 5)).len(), 4);
        let s = s3();
        assert_eq!(s.isomorphisms_to(&s).len(), 6);
        assert!(s.isomorphisms_to(&FiniteGroup::cyclic("c6", 6)).is_empty());
    }

    #[test]
    fn centralizers() {
        let s = s3();
        assert_eq!(s.centralizer(1), vec![0, 1]);
        assert_eq!(s.centralizer(4).len(), 3);
    }
}
