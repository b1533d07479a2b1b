//! Integer vectors, unimodular triples, cylinders, natural-coordinate frames
//! and exact lattice-point enumeration.

mod oracle;

pub use oracle::{best_approx_oracle, BestApprox, OracleReport, ThetaEnclosure, ThetaInput, Tie, TieKind};

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::Error;
use crate::exact_numerics::{floor, floor_sqrt, fmt_rational, rat_int, Rational};

/// `(q, p1, p2)`: the denominator and the two numerators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntVec3 {
    pub q: BigInt,
    pub p1: BigInt,
    pub p2: BigInt,
}

impl IntVec3 {
    pub fn new(q: impl Into<BigInt>, p1: impl Into<BigInt>, p2: impl Into<BigInt>) -> Self {
        Self { q: q.into(), p1: p1.into(), p2: p2.into() }
    }

    pub fn zero() -> Self {
        Self::new(0, 0, 0)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { q: &self.q + &o.q, p1: &self.p1 + &o.p1, p2: &self.p2 + &o.p2 }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { q: &self.q - &o.q, p1: &self.p1 - &o.p1, p2: &self.p2 - &o.p2 }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self { q: &self.q * c, p1: &self.p1 * c, p2: &self.p2 * c }
    }

    pub fn dot(&self, o: &Self) -> BigInt {
        &self.q * &o.q + &self.p1 * &o.p1 + &self.p2 * &o.p2
    }

    pub fn cross(&self, o: &Self) -> Self {
        Self {
            q: &self.p1 * &o.p2 - &self.p2 * &o.p1,
            p1: &self.p2 * &o.q - &self.q * &o.p2,
            p2: &self.q * &o.p1 - &self.p1 * &o.q,
        }
    }

    /// The point `p/q` (requires `q ≠ 0`).
    pub fn direction(&self) -> RatVec2 {
        let q = rat_int(&self.q);
        RatVec2 { v1: rat_int(&self.p1) / &q, v2: rat_int(&self.p2) / q }
    }

    /// `p − q·v`: displacement from the line through 0 with direction `(1, v)`.
    pub fn offset_from(&self, v: &RatVec2) -> RatVec2 {
        let q = rat_int(&self.q);
        RatVec2 { v1: rat_int(&self.p1) - &q * &v.v1, v2: rat_int(&self.p2) - q * &v.v2 }
    }

    pub fn coords(&self) -> [&BigInt; 3] {
        [&self.q, &self.p1, &self.p2]
    }
}

impl fmt::Display for IntVec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.q, self.p1, self.p2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatVec2 {
    pub v1: Rational,
    pub v2: Rational,
}

impl RatVec2 {
    pub fn new(v1: Rational, v2: Rational) -> Self {
        Self { v1, v2 }
    }

    pub fn norm_sq(&self) -> Rational {
        &self.v1 * &self.v1 + &self.v2 * &self.v2
    }

    pub fn dot(&self, o: &Self) -> Rational {
        &self.v1 * &o.v1 + &self.v2 * &o.v2
    }

    pub fn cross(&self, o: &Self) -> Rational {
        &self.v1 * &o.v2 - &self.v2 * &o.v1
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { v1: &self.v1 - &o.v1, v2: &self.v2 - &o.v2 }
    }
}

pub fn det3(a: &IntVec3, b: &IntVec3, c: &IntVec3) -> BigInt {
    a.dot(&b.cross(c))
}

pub fn is_unimodular(a: &IntVec3, b: &IntVec3, c: &IntVec3) -> bool {
    det3(a, b, c).abs().is_one()
}

/// Some `c` with `det(a, b, c) = 1`, when `a, b` span a saturated sublattice.
pub fn complete_basis(a: &IntVec3, b: &IntVec3) -> Option<IntVec3> {
    let n = a.cross(b);
    let e1 = n.q.extended_gcd(&n.p1);
    let e2 = e1.gcd.extended_gcd(&n.p2);
    if !e2.gcd.abs().is_one() {
        return None;
    }
    let c = IntVec3 { q: &e2.x * &e1.x, p1: &e2.x * &e1.y, p2: e2.y.clone() };
    let d = det3(a, b, &c);
    Some(if d.is_negative() { c.scale(&BigInt::from(-1)) } else { c })
}

/// `Π(v, Q, R)`: `0 ≤ x ≤ Q`, `|x·v − p| ≤ R`, radius stored squared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cylinder {
    pub axis: RatVec2,
    pub height: Rational,
    pub radius_sq: Rational,
}

impl Cylinder {
    pub fn new(axis: RatVec2, height: Rational, radius_sq: Rational) -> Result<Self, Error> {
        if !height.is_positive() || radius_sq.is_negative() {
            return Err(Error::Domain("cylinder needs height > 0 and radius² ≥ 0".into()));
        }
        Ok(Self { axis, height, radius_sq })
    }

    /// The same cylinder with its radius multiplied by `√dilation_sq`.
    pub fn dilated(&self, dilation_sq: &Rational) -> Self {
        Self { radius_sq: &self.radius_sq * dilation_sq, ..self.clone() }
    }

    /// Squared distance from `w` to the axis, measured in the plane `x = w.q`.
    pub fn offset_sq(&self, w: &IntVec3) -> Rational {
        w.offset_from(&self.axis).norm_sq()
    }
}

pub fn cylinder_contains(c: &Cylinder, w: &IntVec3, dilation_sq: &Rational) -> bool {
    if w.q.is_negative() || rat_int(&w.q) > c.height {
        return false;
    }
    c.offset_sq(w) <= &c.radius_sq * dilation_sq
}

/// All integer points of `c`, ordered by `x` then `(p1, p2)`. O(Q).
pub fn enumerate_cylinder_points(c: &Cylinder, q_limit: &BigInt) -> Result<Vec<IntVec3>, Error> {
    enumerate_cylinder_points_capped(c, q_limit, usize::MAX)
}

/// As [`enumerate_cylinder_points`], but gives up with `Refused` once more than
/// `max_points` points turn up.
pub fn enumerate_cylinder_points_capped(
    c: &Cylinder,
    q_limit: &BigInt,
    max_points: usize,
) -> Result<Vec<IntVec3>, Error> {
    let q_max = floor(&c.height);
    if rat_int(q_limit) < c.height {
        return Err(Error::Refused(format!(
            "cylinder height {} exceeds the enumeration limit {}",
            fmt_rational(&c.height),
            q_limit
        )));
    }
    // axis = (a1, a2)/l over a common denominator
    let l = c.axis.v1.denom().lcm(c.axis.v2.denom());
    let a1 = c.axis.v1.numer() * (&l / c.axis.v1.denom());
    let a2 = c.axis.v2.numer() * (&l / c.axis.v2.denom());
    // integer residues e = x·a − n·l satisfy Σe² ≤ R²·l²
    let bound = floor(&(&c.radius_sq * rat_int(&(&l * &l))));
    let reach = floor_sqrt(&rat_int(&bound)).expect("nonnegative") + 1;
    let fast = FastScan::new(&q_max, &a1, &a2, &l, &bound, &reach);
    let pts = match fast {
        Some(f) => f.run(max_points),
        None => slow_scan(&q_max, &a1, &a2, &l, &bound, &reach, max_points),
    };
    pts.ok_or_else(|| Error::Refused(format!("cylinder holds more than {max_points} lattice points")))
}

fn div_floor(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn div_ceil(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

fn slow_scan(
    q_max: &BigInt,
    a1: &BigInt,
    a2: &BigInt,
    l: &BigInt,
    bound: &BigInt,
    reach: &BigInt,
    cap: usize,
) -> Option<Vec<IntVec3>> {
    let mut out = Vec::new();
    let mut x = BigInt::zero();
    while &x <= q_max {
        let c1 = &x * a1;
        let c2 = &x * a2;
        let mut n1 = div_ceil(&(&c1 - reach), l);
        let n1_hi = div_floor(&(&c1 + reach), l);
        while n1 <= n1_hi {
            let e1 = &c1 - &n1 * l;
            let e1s = &e1 * &e1;
            if &e1s <= bound {
                let mut n2 = div_ceil(&(&c2 - reach), l);
                let n2_hi = div_floor(&(&c2 + reach), l);
                while n2 <= n2_hi {
                    let e2 = &c2 - &n2 * l;
                    if &e1s + &e2 * &e2 <= *bound {
                        out.push(IntVec3 { q: x.clone(), p1: n1.clone(), p2: n2.clone() });
                        if out.len() > cap {
                            return None;
                        }
                    }
                    n2 += 1;
                }
            }
            n1 += 1;
        }
        x += 1;
    }
    Some(out)
}

/// Machine-integer scan used when every intermediate fits in `i128`.
struct FastScan {
    q_max: i64,
    a1: i128,
    a2: i128,
    l: i128,
    bound: i128,
    reach: i128,
}

impl FastScan {
    fn new(q_max: &BigInt, a1: &BigInt, a2: &BigInt, l: &BigInt, bound: &BigInt, reach: &BigInt) -> Option<Self> {
        let lim = BigInt::one() << 60usize;
        let small = |v: &BigInt| v.abs() < lim;
        if !(small(q_max) && small(a1) && small(a2) && small(l) && small(reach)) {
            return None;
        }
        // |x·a| < 2^120 and residues stay below (reach + l)
        if (reach + l) * (reach + l) * 2 >= (BigInt::one() << 126usize) {
            return None;
        }
        Some(Self {
            q_max: q_max.to_i64()?,
            a1: a1.to_i128()?,
            a2: a2.to_i128()?,
            l: l.to_i128()?,
            bound: bound.to_i128().unwrap_or(i128::MAX),
            reach: reach.to_i128()?,
        })
    }

    fn scan_range(&self, from: i64, to: i64, found: &AtomicUsize, cap: usize) -> Option<Vec<IntVec3>> {
        let mut out = Vec::new();
        for x in from..to {
            if found.load(Ordering::Relaxed) > cap {
                return None;
            }
            let c1 = x as i128 * self.a1;
            let c2 = x as i128 * self.a2;
            let n1_lo = (c1 - self.reach).div_euclid(self.l) + i128::from((c1 - self.reach).rem_euclid(self.l) != 0);
            let n1_hi = (c1 + self.reach).div_euclid(self.l);
            for n1 in n1_lo..=n1_hi {
                let e1 = c1 - n1 * self.l;
                let e1s = e1 * e1;
                if e1s > self.bound {
                    continue;
                }
                let n2_lo =
                    (c2 - self.reach).div_euclid(self.l) + i128::from((c2 - self.reach).rem_euclid(self.l) != 0);
                let n2_hi = (c2 + self.reach).div_euclid(self.l);
                for n2 in n2_lo..=n2_hi {
                    let e2 = c2 - n2 * self.l;
                    if e1s + e2 * e2 <= self.bound {
                        out.push(IntVec3::new(x, n1, n2));
                        if found.fetch_add(1, Ordering::Relaxed) >= cap {
                            return None;
                        }
                    }
                }
            }
        }
        Some(out)
    }

    fn run(&self, cap: usize) -> Option<Vec<IntVec3>> {
        const CHUNK: i64 = 1 << 16;
        let end = self.q_max + 1;
        let chunks: Vec<i64> = (0..end).step_by(CHUNK as usize).collect();
        let found = AtomicUsize::new(0);
        let parts: Option<Vec<Vec<IntVec3>>> =
            chunks.par_iter().map(|&s| self.scan_range(s, (s + CHUNK).min(end), &found, cap)).collect();
        Some(parts?.into_iter().flatten().collect())
    }
}

/// Natural coordinates adapted to a unimodular triple `(w_ν, w_{ν−1}, w_{ν−2})`.
///
/// Images: `w_ν ↦ (q, 0, 0)`, `w_{ν−1} ↦ (a0, d, 0)`, `w_{ν−2} ↦ (g, f, h)`, with
/// `q·d·h = 1`. Only `d²`, `h²` and `f/d` are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub q: BigInt,
    pub a0: BigInt,
    pub g: BigInt,
    pub d_sq: Rational,
    pub h_sq: Rational,
    pub f_over_d: Rational,
    pub basis: [IntVec3; 3],
    axis: RatVec2,
    row_dir: RatVec2,
    orientation: BigInt,
}

/// `(x, y/d, z/h)` of a point in a [`Frame`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NaturalPoint {
    pub x: Rational,
    pub y_over_d: Rational,
    pub z_level: BigInt,
}

pub fn build_frame(w_nu: &IntVec3, w_nu1: &IntVec3, w_nu2: &IntVec3) -> Result<Frame, Error> {
    let det = det3(w_nu, w_nu1, w_nu2);
    if !det.abs().is_one() {
        return Err(Error::Degenerate(format!("frame basis has determinant {det}")));
    }
    if !w_nu.q.is_positive() || w_nu1.q.is_negative() || w_nu2.q.is_negative() {
        return Err(Error::Degenerate("frame basis needs q_ν > 0 and nonnegative older q".into()));
    }
    let axis = w_nu.direction();
    let row_dir = w_nu1.offset_from(&axis);
    let d_sq = row_dir.norm_sq();
    if d_sq.is_zero() {
        return Err(Error::Degenerate("w_{ν-1} lies on the axis of w_ν".into()));
    }
    let q = w_nu.q.clone();
    let qr = rat_int(&q);
    let h_sq = (&qr * &qr * &d_sq).recip();
    let mut frame = Frame {
        q,
        a0: w_nu1.q.clone(),
        g: w_nu2.q.clone(),
        d_sq,
        h_sq,
        f_over_d: Rational::zero(),
        basis: [w_nu.clone(), w_nu1.clone(), w_nu2.clone()],
        axis,
        row_dir,
        orientation: BigInt::one(),
    };
    // orient z so that w_{ν−2} sits on level +1
    let raw = frame.raw_level(w_nu2);
    frame.orientation = if raw.is_negative() { BigInt::from(-1) } else { BigInt::one() };
    frame.f_over_d = frame.y_over_d(w_nu2);
    Ok(frame)
}

impl Frame {
    fn raw_level(&self, w: &IntVec3) -> BigInt {
        let c = self.row_dir.cross(&w.offset_from(&self.axis)) * rat_int(&self.q);
        debug_assert!(c.is_integer());
        c.to_integer()
    }

    pub fn y_over_d(&self, w: &IntVec3) -> Rational {
        w.offset_from(&self.axis).dot(&self.row_dir) / &self.d_sq
    }

    pub fn z_level(&self, w: &IntVec3) -> BigInt {
        self.raw_level(w) * &self.orientation
    }

    pub fn axis(&self) -> &RatVec2 {
        &self.axis
    }

    /// `λ₋ = q·d² = d/h`, the normalized volume of `Π_ν`.
    pub fn volume_ratio(&self) -> Rational {
        rat_int(&self.q) * &self.d_sq
    }

    /// `l·w_ν + m·w_{ν−1} + c·w_{ν−2}`.
    pub fn combine(&self, l: &BigInt, m: &BigInt, c: &BigInt) -> IntVec3 {
        self.basis[0].scale(l).add(&self.basis[1].scale(m)).add(&self.basis[2].scale(c))
    }
}

pub fn natural_coords(frame: &Frame, w: &IntVec3) -> NaturalPoint {
    NaturalPoint { x: rat_int(&w.q), y_over_d: frame.y_over_d(w), z_level: frame.z_level(w) }
}

/// Shorthand used in tests and diagnostics.
pub fn v3(q: i64, p1: i64, p2: i64) -> IntVec3 {
    IntVec3::new(q, p1, p2)
}

/// Whether enumeration of `c` runs on machine integers; exposed for tests.
pub fn fast_scan_applicable(c: &Cylinder) -> bool {
    let q_max = floor(&c.height);
    let l = c.axis.v1.denom().lcm(c.axis.v2.denom());
    let a1 = c.axis.v1.numer() * (&l / c.axis.v1.denom());
    let a2 = c.axis.v2.numer() * (&l / c.axis.v2.denom());
    let bound = floor(&(&c.radius_sq * rat_int(&(&l * &l))));
    let reach = floor_sqrt(&rat_int(&bound)).expect("nonnegative") + 1;
    FastScan::new(&q_max, &a1, &a2, &l, &bound, &reach).is_some()
}
