//! Exact rationals, rational intervals and square-root comparisons.
//!
//! Every predicate that decides whether a construction step is accepted goes
//! through this module. Square roots only ever appear squared or as certified
//! rational enclosures.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

pub type Rational = BigRational;

pub const DEFAULT_SQRT_BITS: u32 = 64;

pub fn int(n: i64) -> BigInt {
    BigInt::from(n)
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: &BigInt) -> Rational {
    Rational::from_integer(n.clone())
}

pub fn floor(r: &Rational) -> BigInt {
    r.floor().to_integer()
}

pub fn ceil(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

/// Nearest integer, ties toward +inf.
pub fn round_half_up(r: &Rational) -> BigInt {
    floor(&(r + rat(1, 2)))
}

/// `⌊√r⌋` for `r ≥ 0`.
pub fn floor_sqrt(r: &Rational) -> Result<BigInt, Error> {
    if r.is_negative() {
        return Err(Error::Domain(format!("square root of negative value {}", fmt_rational(r))));
    }
    Ok(floor(r).sqrt())
}

/// `⌈√r⌉` for `r ≥ 0`.
pub fn ceil_sqrt(r: &Rational) -> Result<BigInt, Error> {
    let c = floor_sqrt(r)?;
    if rat_int(&(&c * &c)) >= *r {
        Ok(c)
    } else {
        Ok(c + 1)
    }
}

/// Order of `√a_sq` against `√b_sq`.
pub fn cmp_sqrt(a_sq: &Rational, b_sq: &Rational) -> Result<Ordering, Error> {
    if a_sq.is_negative() || b_sq.is_negative() {
        return Err(Error::Domain("cmp_sqrt takes nonnegative arguments".into()));
    }
    Ok(a_sq.cmp(b_sq))
}

/// Decides `√a + √b ≤ √c` exactly (all arguments nonnegative).
pub fn sum_sqrt_le(a_sq: &Rational, b_sq: &Rational, c_sq: &Rational) -> bool {
    // √a + √b ≤ √c  ⇔  2√(ab) ≤ c − a − b  ⇔  c−a−b ≥ 0 and 4ab ≤ (c−a−b)²
    let rest = c_sq - a_sq - b_sq;
    if rest.is_negative() {
        return false;
    }
    rat(4, 1) * a_sq * b_sq <= &rest * &rest
}

/// Certified enclosure of `√r`: `lo² ≤ r ≤ hi²`, `hi − lo ≤ 2^-bits · max(1, hi)`.
pub fn sqrt_enclosure(r: &Rational, bits: u32) -> Result<RationalInterval, Error> {
    if r.is_negative() {
        return Err(Error::Domain(format!("square root of negative value {}", fmt_rational(r))));
    }
    if r.is_zero() {
        return Ok(RationalInterval::point(Rational::zero()));
    }
    // √(n/d) = √(n·d)/d; scale by 2^bits before the integer root.
    let n = r.numer();
    let d = r.denom();
    let scale = BigInt::one() << (2 * bits as usize);
    let radicand = n * d * scale;
    let a = radicand.sqrt();
    let den = d * (BigInt::one() << bits as usize);
    let lo = Rational::new(a.clone(), den.clone());
    if &a * &a == radicand {
        return Ok(RationalInterval::point(lo));
    }
    let hi = Rational::new(a + 1, den);
    Ok(RationalInterval { lo, hi })
}

/// Lossy conversion for search heuristics and plots only.
pub fn to_f64(r: &Rational) -> f64 {
    let n = r.numer();
    let d = r.denom();
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    // keep both operands within f64 range
    let shift = (nb - 900).max(db - 900).max(0);
    let (n2, d2) = if shift > 0 { (n >> shift as usize, d >> shift as usize) } else { (n.clone(), d.clone()) };
    let nf = n2.to_f64().unwrap_or(f64::NAN);
    let df = d2.to_f64().unwrap_or(f64::NAN);
    if df == 0.0 {
        // denominator vanished after the shift: magnitude exceeds f64
        return if n.sign() == Sign::Minus { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    nf / df
}

/// `log2 |r|` accurate to a few ulps even for huge operands.
pub fn log2_abs(r: &Rational) -> f64 {
    fn log2_int(x: &BigInt) -> f64 {
        let b = x.bits() as i64;
        let shift = (b - 60).max(0);
        let top = (x.abs() >> shift as usize).to_f64().unwrap_or(f64::NAN);
        top.log2() + shift as f64
    }
    log2_int(r.numer()) - log2_int(r.denom())
}

/// Best-effort rational near a finite f64 (heuristics only).
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(Rational::zero)
}

pub fn fmt_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

pub fn parse_int(s: &str) -> Result<BigInt, Error> {
    BigInt::from_str(s.trim()).map_err(|_| Error::Parse(format!("not an integer: {s:?}")))
}

/// Closed interval with rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalInterval {
    pub lo: Rational,
    pub hi: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntervalOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl RationalInterval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, Error> {
        if lo > hi {
            return Err(Error::Domain(format!("empty interval [{}, {}]", fmt_rational(&lo), fmt_rational(&hi))));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: Rational) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn neg(&self) -> Self {
        Self { lo: -&self.hi, hi: -&self.lo }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let a = &self.lo * c;
        let b = &self.hi * c;
        if a <= b {
            Self { lo: a, hi: b }
        } else {
            Self { lo: b, hi: a }
        }
    }

    pub fn shift(&self, c: &Rational) -> Self {
        Self { lo: &self.lo + c, hi: &self.hi + c }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Self { lo, hi }
    }

    pub fn div(&self, o: &Self) -> Result<Self, Error> {
        if o.contains_zero() {
            return Err(Error::Domain("interval division by an interval containing 0".into()));
        }
        let inv = Self { lo: o.hi.recip(), hi: o.lo.recip() };
        Ok(self.mul(&inv))
    }

    /// Tight enclosure of `{x² : x ∈ self}`.
    pub fn square(&self) -> Self {
        let a = &self.lo * &self.lo;
        let b = &self.hi * &self.hi;
        if self.contains_zero() {
            Self { lo: Rational::zero(), hi: a.max(b) }
        } else if a <= b {
            Self { lo: a, hi: b }
        } else {
            Self { lo: b, hi: a }
        }
    }

    /// Enclosure of `√x` over the interval (requires `lo ≥ 0`).
    pub fn sqrt(&self, bits: u32) -> Result<Self, Error> {
        let lo = sqrt_enclosure(&self.lo, bits)?.lo;
        let hi = sqrt_enclosure(&self.hi, bits)?.hi;
        Ok(Self { lo, hi })
    }

    pub fn strictly_below(&self, o: &Self) -> bool {
        self.hi < o.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / rat(2, 1)
    }
}

pub fn interval_arith(op: IntervalOp, a: &RationalInterval, b: &RationalInterval) -> Result<RationalInterval, Error> {
    Ok(match op {
        IntervalOp::Add => a.add(b),
        IntervalOp::Sub => a.sub(b),
        IntervalOp::Mul => a.mul(b),
        IntervalOp::Div => a.div(b)?,
    })
}

impl fmt::Display for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12e}, {:.12e}]", to_f64(&self.lo), to_f64(&self.hi))
    }
}

/// Rational lower and upper bounds of `2/√3`, tight to `2^-bits`.
pub fn two_over_sqrt3(bits: u32) -> RationalInterval {
    sqrt_enclosure(&rat(4, 3), bits).expect("4/3 is positive")
}

/// Symmetric remainder of `a` modulo positive `m`, in `(-m/2, m/2]`.
pub fn centered_mod(a: &BigInt, m: &BigInt) -> BigInt {
    let r = a.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}
