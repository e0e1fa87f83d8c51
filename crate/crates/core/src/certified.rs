//! Outward-rounded rational intervals for evaluating the iteration bounds,
//! which involve natural logarithms and p-th roots. A ceiling is only
//! reported once the enclosing interval lies strictly between two
//! consecutive integers (or is a single exact point).

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{self, Rational};

/// Precisions (bits) tried in turn by [`certified_ceil`].
const PRECISIONS: [u32; 6] = [64, 128, 256, 512, 1024, 2048];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertifyError {
    #[error("could not separate the ceiling of a bound at {0} bits")]
    Inconclusive(u32),
}

/// Closed interval `[lo, hi]` with rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn point(v: Rational) -> Self {
        Self { lo: v.clone(), hi: v }
    }

    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi }
    }

    pub fn contains(&self, v: &Rational) -> bool {
        self.lo <= *v && *v <= self.hi
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval::new(&self.lo + &other.lo, &self.hi + &other.hi)
    }

    pub fn neg(&self) -> Interval {
        Interval::new(-self.hi.clone(), -self.lo.clone())
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let products = [&self.lo * &other.lo, &self.lo * &other.hi, &self.hi * &other.lo, &self.hi * &other.hi];
        let lo = products.iter().min().unwrap().clone();
        let hi = products.iter().max().unwrap().clone();
        Interval::new(lo, hi)
    }

    /// Reciprocal of an interval that excludes zero.
    pub fn recip(&self) -> Interval {
        assert!(self.lo.is_positive() || self.hi.is_negative(), "reciprocal of an interval containing 0");
        Interval::new(self.hi.recip(), self.lo.recip())
    }

    pub fn scale(&self, k: &Rational) -> Interval {
        self.mul(&Interval::point(k.clone()))
    }

    /// Rounds outward to dyadic endpoints with `prec` fractional bits.
    pub fn widen(&self, prec: u32) -> Interval {
        Interval::new(floor_to(&self.lo, prec), ceil_to(&self.hi, prec))
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }
}

fn scale_pow2(prec: u32) -> BigInt {
    BigInt::one() << prec
}

fn floor_to(v: &Rational, prec: u32) -> Rational {
    let s = scale_pow2(prec);
    Rational::new((v * Rational::from_integer(s.clone())).floor().to_integer(), s)
}

fn ceil_to(v: &Rational, prec: u32) -> Rational {
    let s = scale_pow2(prec);
    Rational::new((v * Rational::from_integer(s.clone())).ceil().to_integer(), s)
}

/// `2·atanh(y) = ln((1+y)/(1−y))` for `0 ≤ y ≤ 1/2`.
fn two_atanh(y: &Rational, prec: u32) -> Interval {
    debug_assert!(!y.is_negative() && *y <= rational::frac(1, 2));
    let work = prec + 16;
    let y_lo = floor_to(y, work);
    let y_hi = ceil_to(y, work);
    let y2_lo = floor_to(&(&y_lo * &y_lo), work);
    let y2_hi = ceil_to(&(&y_hi * &y_hi), work);
    let (mut p_lo, mut p_hi) = (y_lo, y_hi);
    let (mut s_lo, mut s_hi) = (Rational::zero(), Rational::zero());
    // each term shrinks by at least y² ≤ 1/4, i.e. two bits
    let terms = work / 2 + 2;
    for i in 0..terms {
        let d = Rational::from_integer(BigInt::from(2 * i + 1));
        s_lo += floor_to(&(&p_lo / &d), work);
        s_hi += ceil_to(&(&p_hi / &d), work);
        p_lo = floor_to(&(&p_lo * &y2_lo), work);
        p_hi = ceil_to(&(&p_hi * &y2_hi), work);
    }
    // tail Σ_{i≥terms} y^{2i+1}/(2i+1) ≤ y^{2·terms+1} / ((2·terms+1)(1 − y²))
    let d = Rational::from_integer(BigInt::from(2 * terms + 1));
    s_hi += ceil_to(&(&p_hi / (d * (Rational::one() - &y2_hi))), work);
    let two = rational::int(2);
    Interval::new(s_lo * &two, s_hi * two)
}

fn ln2(prec: u32) -> Interval {
    two_atanh(&rational::frac(1, 3), prec)
}

/// Enclosure of `ln x` for rational `x > 0`; exact `[0, 0]` at `x = 1`.
pub fn ln(x: &Rational, prec: u32) -> Interval {
    assert!(x.is_positive(), "ln of a nonpositive number");
    if x.is_one() {
        return Interval::point(Rational::zero());
    }
    if *x < Rational::one() {
        return ln(&x.recip(), prec).neg();
    }
    // x = 2^k · r with 1 ≤ r < 2
    let mut k = x.numer().bits() as i64 - x.denom().bits() as i64;
    let pow2 = |e: i64| -> Rational {
        if e >= 0 {
            Rational::from_integer(BigInt::one() << e as u32)
        } else {
            Rational::new(BigInt::one(), BigInt::one() << (-e) as u32)
        }
    };
    while x / pow2(k) < Rational::one() {
        k -= 1;
    }
    while x / pow2(k) >= rational::int(2) {
        k += 1;
    }
    let r = x / pow2(k);
    let y = (&r - Rational::one()) / (&r + Rational::one());
    let tail = two_atanh(&y, prec);
    let head = ln2(prec + 8).scale(&rational::int(k));
    head.add(&tail).widen(prec + 8)
}

/// Enclosure of `x^(1/k)` for rational `x > 0`, by bisection on dyadics.
pub fn root(x: &Rational, k: u32, prec: u32) -> Interval {
    assert!(x.is_positive() && k >= 1);
    if k == 1 {
        return Interval::point(x.clone());
    }
    let mut lo = if *x >= Rational::one() { Rational::one() } else { Rational::zero() };
    let mut hi = if *x >= Rational::one() { x.clone() } else { Rational::one() };
    let eps = Rational::new(BigInt::one(), scale_pow2(prec));
    let half = rational::frac(1, 2);
    while &hi - &lo > eps {
        let mid = ceil_to(&((&lo + &hi) * &half), prec + 2);
        if rational::pow(&mid, k) <= *x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Interval::new(lo, hi)
}

/// Evaluates `eval(prec)` at increasing precision until the ceiling of the
/// enclosed value is unambiguous.
pub fn certified_ceil(eval: impl Fn(u32) -> Interval) -> Result<BigInt, CertifyError> {
    for prec in PRECISIONS {
        let iv = eval(prec);
        if iv.lo == iv.hi {
            return Ok(rational::ceil_to_bigint(&iv.lo));
        }
        let c_lo = rational::ceil_to_bigint(&iv.lo);
        if c_lo == rational::ceil_to_bigint(&iv.hi) {
            return Ok(c_lo);
        }
    }
    Err(CertifyError::Inconclusive(*PRECISIONS.last().unwrap()))
}
