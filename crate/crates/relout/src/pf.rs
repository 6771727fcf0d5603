//! Nonnegative integer matrices: irreducibility, primitivity, period and certified
//! Perron-Frobenius eigenvalue enclosures (Collatz-Wielandt bounds).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{Interval, Q};

pub type Matrix = Vec<Vec<u64>>;

pub fn identity(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| (i == j) as u64).collect()).collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    let mut c = vec![vec![0u64; m]; n];
    for i in 0..n {
        for k in 0..b.len() {
            if a[i][k] == 0 {
                continue;
            }
            for j in 0..m {
                c[i][j] = c[i][j].saturating_add(a[i][k].saturating_mul(b[k][j]));
            }
        }
    }
    c
}

pub fn mat_pow(a: &Matrix, k: u32) -> Matrix {
    let mut r = identity(a.len());
    for _ in 0..k {
        r = mat_mul(&r, a);
    }
    r
}

fn reach(m: &Matrix, s: usize, transpose: bool) -> Vec<bool> {
    let n = m.len();
    let mut seen = vec![false; n];
    let mut stack = vec![s];
    seen[s] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            let e = if transpose { m[j][i] } else { m[i][j] };
            if e > 0 && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen
}

/// Strongly connected components, each sorted, in order of their smallest index.
pub fn sccs(m: &Matrix) -> Vec<Vec<usize>> {
    let n = m.len();
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let f = reach(m, s, false);
        let b = reach(m, s, true);
        let c: Vec<usize> = (0..n).filter(|&i| f[i] && b[i]).collect();
        for &i in &c {
            comp[i] = out.len();
        }
        out.push(c);
    }
    out
}

pub fn is_irreducible(m: &Matrix) -> bool {
    let n = m.len();
    if n == 0 {
        return false;
    }
    if n == 1 {
        return m[0][0] > 0;
    }
    reach(m, 0, false).into_iter().all(|x| x) && reach(m, 0, true).into_iter().all(|x| x)
}

/// Some power up to Wielandt's bound (n-1)^2+1 is strictly positive.
pub fn is_primitive(m: &Matrix) -> bool {
    if !is_irreducible(m) {
        return false;
    }
    let n = m.len();
    let bool_m: Vec<Vec<bool>> = m.iter().map(|r| r.iter().map(|&x| x > 0).collect()).collect();
    let mut p = bool_m.clone();
    let bound = (n - 1) * (n - 1) + 1;
    for _ in 1..bound {
        if p.iter().all(|r| r.iter().all(|&x| x)) {
            return true;
        }
        let mut q = vec![vec![false; n]; n];
        for i in 0..n {
            for k in 0..n {
                if p[i][k] {
                    for j in 0..n {
                        q[i][j] |= bool_m[k][j];
                    }
                }
            }
        }
        p = q;
    }
    p.iter().all(|r| r.iter().all(|&x| x))
}

/// Index of imprimitivity of an irreducible matrix, with the cyclic class of every index.
pub fn period(m: &Matrix) -> Result<(usize, Vec<usize>)> {
    if !is_irreducible(m) {
        return Err(Error::ReducibleMatrix);
    }
    let n = m.len();
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if m[i][j] > 0 && level[j] == usize::MAX {
                level[j] = level[i] + 1;
                queue.push_back(j);
            }
        }
    }
    let mut d = 0usize;
    for i in 0..n {
        for j in 0..n {
            if m[i][j] > 0 {
                let diff = (level[i] as i64 + 1 - level[j] as i64).unsigned_abs() as usize;
                d = d.gcd(&diff);
            }
        }
    }
    let d = d.max(1);
    Ok((d, level.iter().map(|l| l % d).collect()))
}

#[derive(Clone, Debug)]
pub struct PfEnclosure {
    pub lambda: Interval,
    /// Approximate eigenvector, entries summing to 1 (not certified).
    pub vector: Vec<Q>,
    pub iterations: usize,
    /// The enclosure after every iteration; each contains the next.
    pub history: Vec<Interval>,
}

const KEEP_BITS: u64 = 320;

fn block_enclosure(m: &Matrix, tol: &Q, max_iter: usize) -> PfEnclosure {
    let n = m.len();
    // iterate with M + I, which is primitive whenever M is irreducible
    let shifted: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| BigInt::from(m[i][j] + (i == j) as u64)).collect())
        .collect();
    let mut x: Vec<BigInt> = vec![BigInt::one(); n];
    let one = Q::one();
    let mut lo: Option<Q> = None;
    let mut hi: Option<Q> = None;
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let y: Vec<BigInt> = (0..n)
            .map(|i| (0..n).fold(BigInt::zero(), |acc, j| acc + &shifted[i][j] * &x[j]))
            .collect();
        if x.iter().all(|v| v.is_positive()) {
            let ratios: Vec<Q> = (0..n).map(|i| Q::new(y[i].clone(), x[i].clone())).collect();
            let rmin = ratios.iter().min().unwrap().clone() - &one;
            let rmax = ratios.iter().max().unwrap().clone() - &one;
            lo = Some(match lo {
                Some(l) if l > rmin => l,
                _ => rmin,
            });
            hi = Some(match hi {
                Some(h) if h < rmax => h,
                _ => rmax,
            });
            let iv = Interval::new(lo.clone().unwrap(), hi.clone().unwrap()).round_outward(200);
            lo = Some(iv.lo.clone());
            hi = Some(iv.hi.clone());
            history.push(iv.clone());
            if &iv.width() <= tol || iterations >= max_iter {
                let total: BigInt = y.iter().sum();
                let vector = y.iter().map(|v| Q::new(v.clone(), total.clone())).collect();
                return PfEnclosure { lambda: iv, vector, iterations, history };
            }
        }
        iterations += 1;
        let bits = y.iter().map(|v| v.bits()).max().unwrap_or(0);
        x = if bits > 2 * KEEP_BITS {
            let sh = bits - KEEP_BITS;
            y.into_iter().map(|v| v >> sh).collect()
        } else {
            y
        };
        if x.iter().all(|v| v.is_zero()) {
            x = vec![BigInt::one(); n];
        }
    }
}

/// Certified enclosure of the spectral radius of a nonnegative matrix.
pub fn pf_enclosure(m: &Matrix, tol: &Q) -> Result<PfEnclosure> {
    let n = m.len();
    if n == 0 || m.iter().all(|r| r.iter().all(|&x| x == 0)) {
        return Err(Error::ZeroMatrix);
    }
    let max_iter = 20_000;
    if is_irreducible(m) {
        return Ok(block_enclosure(m, tol, max_iter));
    }
    // spectral radius of a reducible matrix is the largest over its diagonal blocks
    let mut best: Option<(Interval, Vec<usize>, PfEnclosure)> = None;
    let mut history: Vec<Interval> = Vec::new();
    let mut iterations = 0;
    for c in sccs(m) {
        let sub: Matrix = c.iter().map(|&i| c.iter().map(|&j| m[i][j]).collect()).collect();
        if !is_irreducible(&sub) {
            continue;
        }
        let e = block_enclosure(&sub, tol, max_iter);
        iterations += e.iterations;
        let replace = match &best {
            None => true,
            Some((b, _, _)) => e.lambda.hi > b.hi,
        };
        let hull = match &best {
            None => e.lambda.clone(),
            Some((b, _, _)) => Interval::new(
                b.lo.clone().max(e.lambda.lo.clone()),
                b.hi.clone().max(e.lambda.hi.clone()),
            ),
        };
        history.push(hull.clone());
        let keep = if replace { (hull, c, e) } else {
            let (_, bc, be) = best.take().unwrap();
            (hull, bc, be)
        };
        best = Some(keep);
    }
    let (lambda, comp, e) = best.ok_or(Error::ZeroMatrix)?;
    let mut vector = vec![Q::zero(); n];
    for (k, &i) in comp.iter().enumerate() {
        vector[i] = e.vector[k].clone();
    }
    Ok(PfEnclosure { lambda, vector, iterations, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{from_f64, q};

    #[test]
    fn fibonacci_matrix() {
        let m = vec![vec![0, 1], vec![1, 1]];
        assert!(is_irreducible(&m) && is_primitive(&m));
        let e = pf_enclosure(&m, &q(1, 1_000_000_000_000)).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(e.lambda.width() <= q(1, 1_000_000_000_000));
        assert!(e.lambda.contains(&from_f64(golden)) || (e.lambda.mid() - from_f64(golden)).abs() < q(1, 1_000_000_000));
        for w in e.history.windows(2) {
            assert!(w[0].lo <= w[1].lo && w[1].hi <= w[0].hi);
        }
    }

    #[test]
    fn identity_is_not_primitive() {
        let m = identity(2);
        assert!(!is_irreducible(&m));
        assert!(!is_primitive(&m));
        let e = pf_enclosure(&m, &q(1, 1000)).unwrap();
        assert_eq!(e.lambda, Interval::point(Q::one()));
    }

    #[test]
    fn swap_is_imprimitive() {
        let m = vec![vec![0, 0, 1, 0], vec![0, 0, 0, 1], vec![0, 1, 0, 0], vec![1, 1, 0, 0]];
        assert!(is_irreducible(&m));
        assert!(!is_primitive(&m));
        assert_eq!(period(&m).unwrap().0, 2);
        assert!(pf_enclosure(&vec![vec![0, 0], vec![0, 0]], &q(1, 10)).is_err());
    }
}
