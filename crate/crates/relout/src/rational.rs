//! Exact rationals, outward-rounded intervals and the formatting used in reports.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.25` (exactly).
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if s.is_empty() || s.len() > 4096 {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let ip_digits = ip.trim_start_matches(['-', '+']);
        if fp.is_empty() || !fp.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        if !ip_digits.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let whole: BigInt = if ip_digits.is_empty() {
            BigInt::zero()
        } else {
            ip_digits.parse().map_err(|_| bad())?
        };
        let frac: BigInt = fp.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), fp.len());
        let v = Q::new(whole * &scale + frac, scale);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(n))
}

/// Always `p/q`, also for integers, so reports never mix forms.
pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// The exact dyadic value of a finite float.
pub fn from_f64(x: f64) -> Q {
    Q::from_float(x).expect("finite float")
}

/// Largest dyadic with `bits` fractional bits that is <= x.
pub fn round_down(x: &Q, bits: u32) -> Q {
    let scale = BigInt::one() << bits;
    let n = (x.numer() * &scale).div_floor(x.denom());
    Q::new(n, scale)
}

pub fn round_up(x: &Q, bits: u32) -> Q {
    let scale = BigInt::one() << bits;
    let n = (x.numer() * &scale).div_ceil(x.denom());
    Q::new(n, scale)
}

/// The rational with the smallest denominator in the closed interval [lo, hi], 0 <= lo <= hi.
pub fn simplest_between(lo: &Q, hi: &Q) -> Q {
    assert!(lo <= hi && !lo.is_negative());
    let fl = lo.floor();
    if &fl == lo {
        return fl;
    }
    let next = &fl + Q::one();
    if &next <= hi {
        return next;
    }
    let inner = simplest_between(&(Q::one() / (hi - &fl)), &(Q::one() / (lo - &fl)));
    fl + Q::one() / inner
}

/// Decimal string with `digits` fractional digits, rounded toward -inf or +inf.
pub fn fmt_decimal(x: &Q, digits: usize, up: bool) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = x.numer() * &scale;
    let n = if up {
        scaled.div_ceil(x.denom())
    } else {
        scaled.div_floor(x.denom())
    };
    let neg = n.sign() == Sign::Minus;
    let mut s = n.abs().to_string();
    if digits > 0 {
        if s.len() <= digits {
            s = "0".repeat(digits - s.len() + 1) + &s;
        }
        s.insert(s.len() - digits, '.');
    }
    if neg {
        s.insert(0, '-');
    }
    s
}

/// Closed interval with exact rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Q,
    pub hi: Q,
}

impl Interval {
    pub fn new(lo: Q, hi: Q) -> Self {
        assert!(lo <= hi, "inverted interval");
        Interval { lo, hi }
    }

    pub fn point(x: Q) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn zero() -> Self {
        Self::point(Q::zero())
    }

    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> Q {
        (&self.lo + &self.hi) / qi(2)
    }

    pub fn contains(&self, x: &Q) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn overlaps(&self, o: &Interval) -> bool {
        self.lo <= o.hi && o.lo <= self.hi
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn scale(&self, c: &Q) -> Interval {
        if c.is_negative() {
            Interval::new(&self.hi * c, &self.lo * c)
        } else {
            Interval::new(&self.lo * c, &self.hi * c)
        }
    }

    /// Division by an interval that is strictly positive.
    pub fn div(&self, o: &Interval) -> Interval {
        assert!(o.lo.is_positive(), "division by an interval meeting zero");
        let c = [
            &self.lo / &o.lo,
            &self.lo / &o.hi,
            &self.hi / &o.lo,
            &self.hi / &o.hi,
        ];
        min_max(c)
    }

    pub fn pow(&self, n: u32) -> Interval {
        let mut r = Interval::point(Q::one());
        for _ in 0..n {
            r = &r * self;
        }
        r
    }

    pub fn hull(&self, o: &Interval) -> Interval {
        Interval::new(
            self.lo.clone().min(o.lo.clone()),
            self.hi.clone().max(o.hi.clone()),
        )
    }

    pub fn intersect(&self, o: &Interval) -> Option<Interval> {
        let lo = self.lo.clone().max(o.lo.clone());
        let hi = self.hi.clone().min(o.hi.clone());
        (lo <= hi).then(|| Interval::new(lo, hi))
    }

    /// Widens to dyadic endpoints with `bits` fractional bits; keeps denominators bounded.
    pub fn round_outward(&self, bits: u32) -> Interval {
        Interval::new(round_down(&self.lo, bits), round_up(&self.hi, bits))
    }

    pub fn to_strings(&self, digits: usize) -> [String; 2] {
        [
            fmt_decimal(&self.lo, digits, false),
            fmt_decimal(&self.hi, digits, true),
        ]
    }
}

fn min_max(c: [Q; 4]) -> Interval {
    let mut lo = c[0].clone();
    let mut hi = c[0].clone();
    for x in &c[1..] {
        if x < &lo {
            lo = x.clone();
        }
        if x > &hi {
            hi = x.clone();
        }
    }
    Interval::new(lo, hi)
}

impl Add for &Interval {
    type Output = Interval;
    fn add(self, o: &Interval) -> Interval {
        Interval::new(&self.lo + &o.lo, &self.hi + &o.hi)
    }
}

impl Sub for &Interval {
    type Output = Interval;
    fn sub(self, o: &Interval) -> Interval {
        Interval::new(&self.lo - &o.hi, &self.hi - &o.lo)
    }
}

impl Mul for &Interval {
    type Output = Interval;
    fn mul(self, o: &Interval) -> Interval {
        min_max([
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ])
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b] = self.to_strings(15);
        write!(f, "[{a}, {b}]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_q("1/3").unwrap(), q(1, 3));
        assert_eq!(parse_q("-2").unwrap(), qi(-2));
        assert_eq!(parse_q("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_q("-1.5").unwrap(), q(-3, 2));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
        assert!(parse_q("1.").is_err());
    }

    #[test]
    fn simplest() {
        assert_eq!(simplest_between(&q(1, 3), &q(1, 2)), q(1, 2));
        assert_eq!(simplest_between(&q(3, 10), &q(4, 10)), q(1, 3));
        assert_eq!(simplest_between(&q(161, 100), &q(162, 100)), q(21, 13));
        assert_eq!(simplest_between(&qi(2), &qi(3)), qi(2));
    }

    #[test]
    fn decimals_round_outward() {
        assert_eq!(fmt_decimal(&q(1, 3), 3, false), "0.333");
        assert_eq!(fmt_decimal(&q(1, 3), 3, true), "0.334");
        assert_eq!(fmt_decimal(&q(-1, 3), 2, false), "-0.34");
        assert_eq!(fmt_decimal(&qi(2), 2, false), "2.00");
    }

    #[test]
    fn interval_mul_signs() {
        let a = Interval::new(qi(-1), qi(2));
        let b = Interval::new(qi(3), qi(4));
        assert_eq!(&a * &b, Interval::new(qi(-4), qi(8)));
        let r = Interval::new(q(1, 3), q(2, 3)).round_outward(4);
        assert!(r.lo <= q(1, 3) && r.hi >= q(2, 3));
    }
}
