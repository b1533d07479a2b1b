//! Plane geometry of the cross-sections: ellipses through `W = (q, 0)`,
//! hyperbola regions, the mapping `F`, and lattice points of dilated ellipses.
//!
//! Coordinates are `(x, y)` with `x` along the cylinder axis direction and
//! `y` measured in units of the row spacing `d`. Every predicate here turns out
//! to be homogeneous in `d`, so `d` itself never has to be materialized.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::exact_numerics::{
    ceil, floor, rat, rat_int, sqrt_enclosure, two_over_sqrt3, Rational, RationalInterval, DEFAULT_SQRT_BITS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum CaseTag {
    Case1,
    Case2,
}

/// `t·𝔈(q; x₂, y₂)`: `(x·y₂ − y·x₂)² + (q·y)² ≤ t²(q·y₂)²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EllipseSpec {
    pub q: Rational,
    pub x2: Rational,
    pub y2_over_d: Rational,
    pub d_sq: Rational,
    pub dilation: Rational,
}

impl EllipseSpec {
    pub fn new(
        q: Rational,
        x2: Rational,
        y2_over_d: Rational,
        d_sq: Rational,
        dilation: Rational,
    ) -> Result<Self, Error> {
        if !q.is_positive() || !y2_over_d.is_positive() || !d_sq.is_positive() {
            return Err(Error::Domain("ellipse needs q, y₂ and d² positive".into()));
        }
        if dilation < Rational::one() {
            return Err(Error::Domain("ellipse dilation must be at least 1".into()));
        }
        Ok(Self { q, x2, y2_over_d, d_sq, dilation })
    }

    pub fn with_dilation(&self, t: Rational) -> Self {
        Self { dilation: t, ..self.clone() }
    }
}

/// `𝔅₂(a, d) = {y ≥ 0 : (a·y − d·x)² + (q·d)² ≥ (q·y)²}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperbolaRegionSpec {
    pub q: Rational,
    pub a: Rational,
    pub d_sq: Rational,
}

/// Vertical segment `{x = v, y_lo ≤ y ≤ y_hi}` in the parameter plane.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentUV {
    pub case_tag: CaseTag,
    pub v: RationalInterval,
    pub y_lo_over_d: RationalInterval,
    pub y_hi_over_d: RationalInterval,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaWindow {
    pub alpha: Rational,
    pub omega: Rational,
    pub lambda: RationalInterval,
}

impl LambdaWindow {
    pub fn new(alpha: Rational, omega: Rational, lambda: RationalInterval) -> Result<Self, Error> {
        if alpha >= omega {
            return Err(Error::Config("window needs α < ω".into()));
        }
        if lambda.lo < alpha || lambda.hi > omega {
            return Err(Error::Config("λ enclosure must lie inside [α, ω]".into()));
        }
        Ok(Self { alpha, omega, lambda })
    }
}

pub fn ellipse_contains(e: &EllipseSpec, x: &Rational, y_over_d: &Rational) -> bool {
    // divide the defining inequality by d²
    let mu = &e.y2_over_d;
    let a = x * mu - y_over_d * &e.x2;
    let b = &e.q * y_over_d;
    let r = &e.dilation * &e.q * mu;
    &a * &a + &b * &b <= &r * &r
}

pub fn hyperbola_region_contains(h: &HyperbolaRegionSpec, x: &Rational, y_over_d: &Rational) -> Result<bool, Error> {
    if y_over_d.is_negative() {
        return Err(Error::Domain("hyperbola region is defined for y ≥ 0 only".into()));
    }
    let a = &h.a * y_over_d - x;
    let lhs = &a * &a + &h.q * &h.q;
    let rhs = &h.q * &h.q * y_over_d * y_over_d;
    Ok(lhs >= rhs)
}

fn check_lambda(lambda: &RationalInterval) -> Result<(), Error> {
    if lambda.lo < Rational::one() || &lambda.hi * &lambda.hi >= rat(4, 3) {
        return Err(Error::Domain("λ must satisfy 1 ≤ λ < 2/√3".into()));
    }
    Ok(())
}

/// Enclosure of `ε_λ = λ − 2√(λ² − 1)`, which is decreasing in `λ`.
pub fn epsilon_lambda(lambda: &RationalInterval) -> Result<RationalInterval, Error> {
    epsilon_lambda_bits(lambda, DEFAULT_SQRT_BITS)
}

pub fn epsilon_lambda_bits(lambda: &RationalInterval, bits: u32) -> Result<RationalInterval, Error> {
    check_lambda(lambda)?;
    let one = Rational::one();
    let s_hi = sqrt_enclosure(&(&lambda.hi * &lambda.hi - &one), bits)?.hi;
    let s_lo = sqrt_enclosure(&(&lambda.lo * &lambda.lo - &one), bits)?.lo;
    let lo = &lambda.hi - rat(2, 1) * s_hi;
    let hi = &lambda.lo - rat(2, 1) * s_lo;
    RationalInterval::new(lo, hi)
}

/// `y′²` of the single common point of `∂𝔅₂(a, d)` and `∂𝔅₂(a + q, d)`.
///
/// Measured across the rows, the common point sits at `y′ = 2d/√3` for every
/// `a` and `q`; along the axis it is `x′ = (2a + q)/√3`.
pub fn hyperbola_intersection_x_sq(_q: &Rational, d_sq: &Rational) -> Rational {
    rat(4, 3) * d_sq
}

/// `r = aλ + q√(λ²−1)` and `s = (a+q)λ − q√(λ²−1)`.
pub fn segment_endpoints_rs(
    lambda: &RationalInterval,
    q: &Rational,
    a: &Rational,
) -> Result<(RationalInterval, RationalInterval), Error> {
    check_lambda(lambda)?;
    let root = lambda.square().shift(&-Rational::one()).sqrt(DEFAULT_SQRT_BITS)?;
    let qroot = root.scale(q);
    let r = lambda.scale(a).add(&qroot);
    let s = lambda.scale(&(a + q)).sub(&qroot);
    Ok((r, s))
}

/// The vertical segment `[U, V]` above `v = (a0 + (k + ½)q)·λ`.
///
/// Case 1 runs from `dα` to `dω`; case 2 from `u = dvλ/s` to `dλ`.
pub fn segment_uv(
    case_tag: CaseTag,
    lambda: &RationalInterval,
    q: &Rational,
    a0: &Rational,
    k: &BigInt,
    alpha: &Rational,
    omega: &Rational,
) -> Result<SegmentUV, Error> {
    let one = Rational::one();
    let shift = a0 + (rat_int(k) + rat(1, 2)) * q;
    let v = lambda.scale(&shift);
    match case_tag {
        CaseTag::Case1 => {
            if !alpha.is_positive() || omega >= &one || alpha >= omega {
                return Err(Error::Config("case 1 needs 0 < α < ω < 1".into()));
            }
            Ok(SegmentUV {
                case_tag,
                v,
                y_lo_over_d: RationalInterval::point(alpha.clone()),
                y_hi_over_d: RationalInterval::point(omega.clone()),
            })
        }
        CaseTag::Case2 => {
            if alpha <= &one || omega * omega >= rat(4, 3) || alpha >= omega {
                return Err(Error::Config("case 2 needs 1 < α < ω < 2/√3".into()));
            }
            if a0.is_negative() || k < &BigInt::from(2) {
                return Err(Error::Config("case 2 needs a0 ≥ 0 and k ≥ 2".into()));
            }
            if lambda.lo < *alpha || lambda.hi > *omega {
                return Err(Error::Config("λ must lie in [α, ω]".into()));
            }
            let a = a0 + rat_int(k) * q;
            let (_, s) = segment_endpoints_rs(lambda, q, &a)?;
            let u = v.mul(lambda).div(&s)?;
            Ok(SegmentUV { case_tag, v, y_lo_over_d: u, y_hi_over_d: lambda.clone() })
        }
    }
}

fn check_frame_identity(q: &Rational, h_sq: &Rational, d_sq: &Rational) -> Result<(), Error> {
    if !(q * q * d_sq * h_sq).is_one() {
        return Err(Error::Domain("frame data violates q²·d²·h² = 1".into()));
    }
    Ok(())
}

/// `F(x₂, y₂) = (h(x₂² + q²)/(y₂q), hx₂/q)`, with both `y` values over `d`.
#[allow(non_snake_case)]
pub fn map_F(
    q: &Rational,
    h_sq: &Rational,
    d_sq: &Rational,
    x2: &Rational,
    y2_over_d: &Rational,
) -> Result<(Rational, Rational), Error> {
    check_frame_identity(q, h_sq, d_sq)?;
    if !y2_over_d.is_positive() {
        return Err(Error::Domain("F needs y₂ > 0".into()));
    }
    let qqd = q * q * d_sq;
    let x1 = (x2 * x2 + q * q) / (y2_over_d * &qqd);
    let y1 = x2 / &qqd;
    Ok((x1, y1))
}

#[allow(non_snake_case)]
pub fn map_F_inverse(
    q: &Rational,
    d_sq: &Rational,
    x1: &Rational,
    y1_over_d: &Rational,
) -> Result<(Rational, Rational), Error> {
    if !x1.is_positive() {
        return Err(Error::Domain("F⁻¹ needs x₁ > 0".into()));
    }
    let qqd = q * q * d_sq;
    let x2 = y1_over_d * &qqd;
    let y2 = (&x2 * &x2 + q * q) / (x1 * &qqd);
    Ok((x2, y2))
}

/// Dilation that keeps the lattice out of `t·𝔈`.
///
/// Case 1: `1/ω` for `ω > 1/2`, else `3/2`. Case 2: `1 + δ/2` with `δ` a
/// rational lower bound of `2/√3 − ω`.
///
/// Both stay strictly inside what the lattice allows: `1/ω` with `ω ≤ 1/2`
/// reaches `±2g₁` on row 0, and `1 + (2/√3 − ω)` lets the half-period points
/// `(a0 + jq, ±d)` in for `λ` near 1.
pub fn dilation_coefficient(case_tag: CaseTag, omega: &Rational) -> Result<Rational, Error> {
    match case_tag {
        CaseTag::Case1 => {
            if !omega.is_positive() || omega >= &Rational::one() {
                return Err(Error::Config("case 1 dilation needs 0 < ω < 1".into()));
            }
            Ok(if omega > &rat(1, 2) { omega.recip() } else { rat(3, 2) })
        }
        CaseTag::Case2 => {
            if omega < &Rational::one() || omega * omega >= rat(4, 3) {
                return Err(Error::Config("case 2 dilation needs 1 ≤ ω < 2/√3".into()));
            }
            let delta = two_over_sqrt3(DEFAULT_SQRT_BITS).lo - omega;
            if !delta.is_positive() {
                return Err(Error::Config("ω too close to 2/√3 for the dilation bound".into()));
            }
            Ok(Rational::one() + delta / rat(2, 1))
        }
    }
}

/// `1/ω` for every case-1 `ω`; too wide once `ω ≤ 1/2`.
pub fn wide_case1_dilation(omega: &Rational) -> Rational {
    omega.recip()
}

/// `1 + 2/√3 − ω` (lower rational bound); too wide for `λ` near 1.
pub fn wide_case2_dilation(omega: &Rational) -> Rational {
    Rational::one() + two_over_sqrt3(DEFAULT_SQRT_BITS).lo - omega
}

/// Coefficients `(l, m)` of all points `l·(q, 0) + m·(a0, d)` in the closed
/// dilated ellipse, ordered by `m` then `l`.
pub fn ellipse_lattice_points(
    e: &EllipseSpec,
    lattice_q: &Rational,
    lattice_a0: &Rational,
    enum_limit: u64,
) -> Result<Vec<(BigInt, BigInt)>, Error> {
    if !lattice_q.is_positive() {
        return Err(Error::Domain("lattice period must be positive".into()));
    }
    let mu = &e.y2_over_d;
    let t = &e.dilation;
    let tmu = t * mu;
    // rows |m| ≤ tμ; on row m, x = (m·x₂ ± q√(t²μ² − m²))/μ
    let m_max = floor(&tmu);
    let rows = &m_max * 2 + 1;
    if rows > BigInt::from(enum_limit) {
        return Err(Error::Refused(format!("ellipse spans {rows} lattice rows, limit {enum_limit}")));
    }
    let mut out = Vec::new();
    let mut m = -m_max.clone();
    while m <= m_max {
        let mr = rat_int(&m);
        let disc = &tmu * &tmu - &mr * &mr;
        if !disc.is_negative() {
            let root = sqrt_enclosure(&disc, DEFAULT_SQRT_BITS)?.hi;
            let centre = &mr * &e.x2 / mu;
            let half = &e.q * root / mu;
            let base = &mr * lattice_a0;
            let l_lo = floor(&((&centre - &half - &base) / lattice_q));
            let l_hi = ceil(&((&centre + &half - &base) / lattice_q));
            if &l_hi - &l_lo > BigInt::from(enum_limit) {
                return Err(Error::Refused(format!("ellipse row {m} holds too many candidates, limit {enum_limit}")));
            }
            let mut l = l_lo;
            while l <= l_hi {
                let x = rat_int(&l) * lattice_q + &base;
                if ellipse_contains(e, &x, &mr) {
                    out.push((l.clone(), m.clone()));
                    if out.len() as u64 > enum_limit {
                        return Err(Error::Refused(format!("ellipse holds more than {enum_limit} lattice points")));
                    }
                }
                l += 1;
            }
        }
        m += 1;
    }
    Ok(out)
}

/// Whether the dilated ellipse meets the lattice only in `0, ±(q, 0)`.
pub fn lemma5_empty(e: &EllipseSpec, lattice_q: &BigInt, lattice_a0: &BigInt, enum_limit: u64) -> Result<bool, Error> {
    let pts = ellipse_lattice_points(e, &rat_int(lattice_q), &rat_int(lattice_a0), enum_limit)?;
    let zero = BigInt::zero();
    Ok(pts.iter().all(|(l, m)| m == &zero && l.abs() <= BigInt::one()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_circle_excludes_far_point() {
        let e = EllipseSpec::new(rat(1, 1), rat(0, 1), rat(1, 1), rat(1, 1), rat(1, 1)).unwrap();
        assert!(!ellipse_contains(&e, &rat(0, 1), &rat(2, 1)));
        assert!(ellipse_contains(&e, &rat(1, 1), &rat(0, 1)));
    }

    #[test]
    fn rows_of_a_circle() {
        // unit circle around 0 against the integer lattice: 0, (±1, 0), (0, ±1)
        let e = EllipseSpec::new(rat(1, 1), rat(0, 1), rat(1, 1), rat(1, 1), rat(1, 1)).unwrap();
        let pts = ellipse_lattice_points(&e, &rat(1, 1), &rat(0, 1), 100).unwrap();
        assert_eq!(pts.len(), 5);
    }
}
