//! Exact dense two-phase simplex over the rationals with Bland's rule.

use num_traits::{One, Signed, Zero};

use crate::rational::Q;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Q>, value: Q },
    Infeasible,
    Unbounded,
}

/// maximize `objective . x` subject to `eq` rows (= rhs), `le` rows (<= rhs), x >= 0.
#[derive(Clone, Debug, Default)]
pub struct Lp {
    pub n: usize,
    pub objective: Vec<Q>,
    pub eq: Vec<(Vec<Q>, Q)>,
    pub le: Vec<(Vec<Q>, Q)>,
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    cost: Vec<Q>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            *x = &*x / &p;
        }
        let pr = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pr) {
                if !y.is_zero() {
                    *x = &*x - &f * y;
                }
            }
        }
        if !self.cost[c].is_zero() {
            let f = self.cost[c].clone();
            for (x, y) in self.cost.iter_mut().zip(&pr) {
                if !y.is_zero() {
                    *x = &*x - &f * y;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes the cost row over columns `< allowed`; false if unbounded.
    fn run(&mut self, allowed: usize) -> bool {
        loop {
            let Some(c) = (0..allowed).find(|&j| self.cost[j].is_negative()) else {
                return true;
            };
            let rhs = self.cols;
            let mut best: Option<(Q, usize, usize)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[rhs] / &row[c];
                    let better = match &best {
                        None => true,
                        Some((b, _, bv)) => ratio < *b || (ratio == *b && self.basis[i] < *bv),
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match best {
                None => return false,
                Some((_, r, _)) => self.pivot(r, c),
            }
        }
    }
}

pub fn maximize(lp: &Lp) -> LpOutcome {
    let n = lp.n;
    let m_le = lp.le.len();
    // rows: le rows with slack, then eq rows
    let mut raw: Vec<(Vec<Q>, Q, Option<usize>, bool)> = Vec::new();
    for (k, (a, b)) in lp.le.iter().enumerate() {
        raw.push((a.clone(), b.clone(), Some(k), false));
    }
    for (a, b) in &lp.eq {
        raw.push((a.clone(), b.clone(), None, true));
    }
    let needs_art: Vec<bool> = raw.iter().map(|(_, b, _, is_eq)| *is_eq || b.is_negative()).collect();
    let n_art = needs_art.iter().filter(|&&x| x).count();
    let cols = n + m_le + n_art;
    let mut rows = Vec::with_capacity(raw.len());
    let mut basis = Vec::with_capacity(raw.len());
    let mut art = 0usize;
    for (i, (a, b, slack, _)) in raw.iter().enumerate() {
        let mut row = vec![Q::zero(); cols + 1];
        let neg = b.is_negative();
        for j in 0..n {
            row[j] = if neg { -a[j].clone() } else { a[j].clone() };
        }
        if let Some(k) = slack {
            row[n + k] = if neg { -Q::one() } else { Q::one() };
        }
        row[cols] = if neg { -b.clone() } else { b.clone() };
        if needs_art[i] {
            row[n + m_le + art] = Q::one();
            basis.push(n + m_le + art);
            art += 1;
        } else {
            basis.push(n + slack.expect("le row"));
        }
        rows.push(row);
    }
    let mut cost = vec![Q::zero(); cols + 1];
    for (i, row) in rows.iter().enumerate() {
        if needs_art[i] {
            for j in 0..n + m_le {
                cost[j] = &cost[j] - &row[j];
            }
            cost[cols] = &cost[cols] - &row[cols];
        }
    }
    let mut t = Tableau { rows, cost, basis, cols };
    if n_art > 0 {
        t.run(cols);
        if t.cost[cols].is_negative() {
            return LpOutcome::Infeasible;
        }
        // drive zero-valued artificials out of the basis
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= n + m_le {
                match (0..n + m_le).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(j) => {
                        t.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }
    // phase 2 on the structural and slack columns
    let keep = n + m_le;
    for row in t.rows.iter_mut() {
        let rhs = row[cols].clone();
        row.truncate(keep);
        row.push(rhs);
    }
    t.cols = keep;
    let mut cost = vec![Q::zero(); keep + 1];
    for j in 0..n {
        cost[j] = -lp.objective[j].clone();
    }
    for (i, row) in t.rows.iter().enumerate() {
        let cb = cost[t.basis[i]].clone();
        if cb.is_zero() {
            continue;
        }
        for j in 0..=keep {
            cost[j] = &cost[j] - &cb * &row[j];
        }
    }
    t.cost = cost;
    if !t.run(keep) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Q::zero(); n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rows[i][keep].clone();
        }
    }
    let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpOutcome::Optimal { x, value }
}

/// Some feasible point of the constraints, if any.
pub fn feasible_point(n: usize, eq: Vec<(Vec<Q>, Q)>, le: Vec<(Vec<Q>, Q)>) -> Option<Vec<Q>> {
    let lp = Lp { n, objective: vec![Q::zero(); n], eq, le };
    match maximize(&lp) {
        LpOutcome::Optimal { x, .. } => Some(x),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn small_program() {
        // max x + y, x + 2y <= 4, 3x + y <= 6
        let lp = Lp {
            n: 2,
            objective: vec![qi(1), qi(1)],
            eq: vec![],
            le: vec![(vec![qi(1), qi(2)], qi(4)), (vec![qi(3), qi(1)], qi(6))],
        };
        match maximize(&lp) {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(x, vec![q(8, 5), q(6, 5)]);
                assert_eq!(value, q(14, 5));
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let bad = Lp { n: 1, objective: vec![qi(1)], eq: vec![(vec![qi(1)], qi(-1))], le: vec![] };
        assert_eq!(maximize(&bad), LpOutcome::Infeasible);
        let open = Lp { n: 1, objective: vec![qi(1)], eq: vec![], le: vec![] };
        assert_eq!(maximize(&open), LpOutcome::Unbounded);
    }

    #[test]
    fn equality_with_negative_le() {
        // x + y = 1, -x <= -1/3  =>  x >= 1/3; max y gives y = 2/3
        let lp = Lp {
            n: 2,
            objective: vec![qi(0), qi(1)],
            eq: vec![(vec![qi(1), qi(1)], qi(1))],
            le: vec![(vec![qi(-1), qi(0)], q(-1, 3))],
        };
        match maximize(&lp) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, q(2, 3)),
            o => panic!("{o:?}"),
        }
    }
}
