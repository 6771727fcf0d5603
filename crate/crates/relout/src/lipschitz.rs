//! Stretch factors, displacement and exact minimization of displacement over a simplex.

use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::candidates::{candidates, Candidate};
use crate::error::{Error, Result};
use crate::freeprod::{FPAutomorphism, Word};
use crate::lp::{maximize, Lp, LpOutcome};
use crate::marked_graph::MarkedGraph;
use crate::rational::{q, qi, simplest_between, Interval, Q};

/// A rational enclosure `lower <= value <= upper`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedValue {
    pub lower: Q,
    pub upper: Q,
    pub tol: Q,
}

impl CertifiedValue {
    pub fn exact(x: Q) -> Self {
        CertifiedValue { lower: x.clone(), upper: x, tol: Q::zero() }
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.lower.clone(), self.upper.clone())
    }

    pub fn width(&self) -> Q {
        &self.upper - &self.lower
    }

    pub fn contains(&self, x: &Q) -> bool {
        &self.lower <= x && x <= &self.upper
    }
}

fn dot(a: &[u32], l: &[Q]) -> Q {
    a.iter().zip(l).filter(|(c, _)| **c > 0).map(|(c, x)| x * Q::from_integer((*c).into())).sum()
}

/// Λ(X, Y) together with a candidate realizing it.
pub fn stretch_witness(x: &MarkedGraph, y: &MarkedGraph) -> (Q, Word) {
    let mut best: Option<(Q, Word)> = None;
    for c in candidates(x) {
        let r = y.translation_length(&c.word) / dot(&c.transition, &x.lengths);
        if best.as_ref().map_or(true, |(b, _)| r > *b) {
            best = Some((r, c.word));
        }
    }
    best.expect("every simplex has a candidate")
}

/// Λ(X, Y) = max over candidates of X of ℓ_Y / ℓ_X, exactly.
pub fn stretch(x: &MarkedGraph, y: &MarkedGraph) -> Q {
    stretch_witness(x, y).0
}

pub fn sym_distance(x: &MarkedGraph, y: &MarkedGraph) -> Q {
    stretch(x, y) * stretch(y, x)
}

/// λ_φ(X) = Λ(X, Xφ).
pub fn displacement(x: &MarkedGraph, phi: &FPAutomorphism) -> Q {
    candidates(x)
        .iter()
        .map(|c| x.translation_length(&phi.apply(&c.word)) / dot(&c.transition, &x.lengths))
        .max()
        .expect("every simplex has a candidate")
}

/// Shortest candidate length.
pub fn systole(x: &MarkedGraph) -> Q {
    candidates(x).iter().map(|c| dot(&c.transition, &x.lengths)).min().expect("candidate")
}

/// Every candidate has ℓ_X(g)/vol(X) > eps.
pub fn is_thick(x: &MarkedGraph, eps: &Q) -> bool {
    systole(x) / x.volume() > *eps
}

/// A random metric on the simplex of `x` with rational lengths summing to 1.
pub fn random_metric<R: Rng>(x: &MarkedGraph, rng: &mut R, denom: i64) -> MarkedGraph {
    let raw: Vec<i64> = (0..x.num_edges()).map(|_| rng.gen_range(1..=denom)).collect();
    let total: i64 = raw.iter().sum();
    x.with_lengths(raw.into_iter().map(|r| q(r, total)).collect()).expect("positive lengths")
}

/// Linear data of displacement on one open simplex: for each candidate g, the shape
/// of g and of φ(g), so that λ_φ(L) = max_g (t_g . L) / (s_g . L).
#[derive(Clone, Debug)]
pub struct SimplexDisplacement {
    pub candidates: Vec<Candidate>,
    pub source: Vec<Vec<u32>>,
    pub image: Vec<Vec<u32>>,
    n: usize,
    rows: Vec<(Vec<u32>, Vec<u32>)>,
}

#[derive(Clone, Debug)]
pub struct SimplexMinimum {
    pub value: CertifiedValue,
    /// Normalized lengths attaining a displacement at most `value.upper`.
    pub minimizer: Vec<Q>,
    /// Some point of the open simplex lies in the sublevel set at `value.upper`.
    pub interior: bool,
    /// Indices of candidates whose ratio at the minimizer is at least `value.lower`.
    pub tight: Vec<usize>,
    pub steps: usize,
}

impl SimplexDisplacement {
    pub fn new(x: &MarkedGraph, phi: &FPAutomorphism) -> Self {
        let cands = candidates(x);
        let source: Vec<Vec<u32>> = cands.iter().map(|c| c.transition.clone()).collect();
        let image: Vec<Vec<u32>> = cands.iter().map(|c| x.shape(&phi.apply(&c.word))).collect();
        let mut rows: Vec<(Vec<u32>, Vec<u32>)> =
            source.iter().cloned().zip(image.iter().cloned()).collect();
        rows.sort();
        rows.dedup();
        SimplexDisplacement { candidates: cands, source, image, n: x.num_edges(), rows }
    }

    pub fn num_edges(&self) -> usize {
        self.n
    }

    /// Exact displacement at positive lengths `l`.
    pub fn at(&self, l: &[Q]) -> Q {
        self.rows.iter().map(|(s, t)| dot(t, l) / dot(s, l)).max().expect("candidate")
    }

    /// Displacement at lengths on the closed simplex, if every candidate stays positive.
    fn at_closed(&self, l: &[Q]) -> Option<Q> {
        let mut best: Option<Q> = None;
        for (s, t) in &self.rows {
            let d = dot(s, l);
            if d.is_zero() {
                return None;
            }
            let r = dot(t, l) / d;
            if best.as_ref().map_or(true, |b| r > *b) {
                best = Some(r);
            }
        }
        best
    }

    fn constraints(&self, t: &Q) -> Vec<(Vec<Q>, Q)> {
        let mut le: Vec<(Vec<Q>, Q)> = self
            .rows
            .iter()
            .map(|(s, im)| {
                let row: Vec<Q> = (0..self.n)
                    .map(|e| Q::from_integer(im[e].into()) - t * Q::from_integer(s[e].into()))
                    .collect();
                (row, Q::zero())
            })
            .collect();
        le.sort();
        le.dedup();
        le
    }

    /// A point of the closed unit simplex with displacement at most `t`, if any.
    pub fn feasible(&self, t: &Q) -> Option<Vec<Q>> {
        let lp = Lp {
            n: self.n,
            objective: vec![Q::zero(); self.n],
            eq: vec![(vec![Q::one(); self.n], Q::one())],
            le: self.constraints(t),
        };
        match maximize(&lp) {
            LpOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }

    /// Maximizes the smallest edge over the sublevel set at `t`.
    pub fn margin(&self, t: &Q) -> Option<(Q, Vec<Q>)> {
        let n = self.n;
        let mut eq_row = vec![Q::one(); n];
        eq_row.push(Q::zero());
        let mut le: Vec<(Vec<Q>, Q)> = self
            .constraints(t)
            .into_iter()
            .map(|(mut r, b)| {
                r.push(Q::zero());
                (r, b)
            })
            .collect();
        for e in 0..n {
            let mut r = vec![Q::zero(); n + 1];
            r[e] = -Q::one();
            r[n] = Q::one();
            le.push((r, Q::zero()));
        }
        let mut objective = vec![Q::zero(); n + 1];
        objective[n] = Q::one();
        let lp = Lp { n: n + 1, objective, eq: vec![(eq_row, Q::one())], le };
        match maximize(&lp) {
            LpOutcome::Optimal { mut x, value } => {
                x.pop();
                Some((value, x))
            }
            _ => None,
        }
    }

    /// Bisection on t with exact LP feasibility until the enclosure has width <= tol.
    pub fn minimize(&self, tol: &Q) -> Result<SimplexMinimum> {
        if self.n == 0 {
            return Err(Error::EmptySimplex);
        }
        let bary = vec![q(1, self.n as i64); self.n];
        let mut hi = self.at(&bary);
        let mut best = bary;
        let mut lo = Q::zero();
        let mut steps = 0;
        if let Some(l) = self.feasible(&lo) {
            hi = Q::zero();
            best = l;
        }
        while &hi - &lo > *tol {
            steps += 1;
            let w = &hi - &lo;
            let three = qi(3);
            let t = simplest_between(&(&lo + &w / &three), &(&hi - &w / &three));
            match self.feasible(&t) {
                Some(l) => {
                    // the true displacement at l may be lower still
                    match self.at_closed(&l) {
                        Some(d) if d <= t => {
                            hi = d;
                            best = l;
                        }
                        _ => {
                            hi = t;
                            best = l;
                        }
                    }
                }
                None => lo = t,
            }
        }
        let (interior, minimizer) = match self.margin(&hi) {
            Some((m, l)) if m.is_positive() => (true, l),
            Some((_, l)) => (false, l),
            None => (false, best),
        };
        let tight = (0..self.source.len())
            .filter(|&i| {
                let d = dot(&self.source[i], &minimizer);
                !d.is_zero() && dot(&self.image[i], &minimizer) / d >= lo
            })
            .collect();
        Ok(SimplexMinimum {
            value: CertifiedValue { lower: lo, upper: hi, tol: tol.clone() },
            minimizer,
            interior,
            tight,
            steps,
        })
    }
}

/// λ_φ(Δ) for the open simplex Δ containing `x`.
pub fn min_displacement_on_simplex(
    x: &MarkedGraph,
    phi: &FPAutomorphism,
    tol: &Q,
) -> Result<SimplexMinimum> {
    SimplexDisplacement::new(x, phi).minimize(tol)
}
