//! Conditions 1–6 recomputed from the raw vectors `w_1, …, w_N`.
//!
//! Nothing here looks at how a vector was found. Cylinder conditions are
//! decided either by scanning every integer point of the dilated cylinder or,
//! for large `q_ν`, by the exact ellipse section and containment arguments.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::conic_toolkit::{ellipse_lattice_points, map_F_inverse, EllipseSpec};
use crate::exact_numerics::{ceil, floor, fmt_rational, rat_int, sum_sqrt_le, Rational};
use crate::lattice_geometry::{
    build_frame, complete_basis, cylinder_contains, enumerate_cylinder_points_capped, is_unimodular, Cylinder, IntVec3,
};

use super::schedule::ParameterSchedule;

/// Row and candidate cap for the ellipse-section certificate.
const SECTION_LIMIT: u64 = 64;

/// A valid step has at most four points in a cylinder; a tampered record can
/// have millions, so scans stop early.
const POINT_CAP: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CondStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertMode {
    Exact,
    Enumerated,
    Certified,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionResult {
    pub status: CondStatus,
    pub mode: CertMode,
    pub detail: String,
}

impl ConditionResult {
    fn na(why: &str) -> Self {
        Self { status: CondStatus::NotApplicable, mode: CertMode::Exact, detail: why.into() }
    }

    fn exact(ok: bool, detail: String) -> Self {
        Self { status: if ok { CondStatus::Pass } else { CondStatus::Fail }, mode: CertMode::Exact, detail }
    }

    fn with_mode(ok: bool, mode: CertMode, detail: String) -> Self {
        Self { status: if ok { CondStatus::Pass } else { CondStatus::Fail }, mode, detail }
    }

    pub fn passed(&self) -> bool {
        self.status != CondStatus::Fail
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionReport {
    pub nu: u64,
    /// Conditions 1 through 6, in order.
    pub conditions: Vec<ConditionResult>,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(ConditionResult::passed)
    }

    /// 1-based number of the first failing condition.
    pub fn first_failure(&self) -> Option<usize> {
        self.conditions.iter().position(|c| !c.passed()).map(|i| i + 1)
    }

    /// How the cylinder conditions were decided at this step.
    pub fn cert_mode(&self) -> CertMode {
        for c in &self.conditions[3..5] {
            if c.status != CondStatus::NotApplicable {
                return c.mode;
            }
        }
        CertMode::Exact
    }
}

/// `|q·v_ν − p|²` for `w = (q, p)`, with `v_ν` the direction of `w_ν`.
pub fn offset_sq(w_nu: &IntVec3, w: &IntVec3) -> Rational {
    w.offset_from(&w_nu.direction()).norm_sq()
}

/// `R_ν² = |q_{ν−1}v_ν − p_{ν−1}|²`.
///
/// `None` before step 2 or when `q_ν` is not positive.
pub fn radius_sq(ws: &[IntVec3], nu: usize) -> Option<Rational> {
    (nu >= 2 && ws[nu - 1].q.is_positive()).then(|| offset_sq(&ws[nu - 1], &ws[nu - 2]))
}

/// `(R_ν⁻)² = |q_{ν−2}v_ν − p_{ν−2}|²`.
pub fn radius_minus_sq(ws: &[IntVec3], nu: usize) -> Option<Rational> {
    (nu >= 3 && ws[nu - 1].q.is_positive()).then(|| offset_sq(&ws[nu - 1], &ws[nu - 3]))
}

pub fn verify_conditions(ws: &[IntVec3], schedule: &ParameterSchedule, nu: usize, enum_limit: u64) -> ConditionReport {
    let conditions = vec![
        condition1(ws, nu),
        condition2(ws, schedule, nu),
        condition3(ws, schedule, nu),
        condition4(ws, schedule, nu, enum_limit),
        condition5(ws, schedule, nu, enum_limit),
        condition6(ws, schedule, nu),
    ];
    ConditionReport { nu: nu as u64, conditions }
}

fn eps_of(schedule: &ParameterSchedule, nu: usize) -> Option<(Rational, Rational)> {
    schedule.step(nu as u64).map(|p| (p.epsilon.clone(), p.eps_minus.clone()))
}

fn condition1(ws: &[IntVec3], nu: usize) -> ConditionResult {
    if nu < 3 {
        return ConditionResult::na("needs three vectors");
    }
    let ok = is_unimodular(&ws[nu - 3], &ws[nu - 2], &ws[nu - 1]);
    ConditionResult::exact(ok, if ok { "basis of Z³".into() } else { "determinant is not ±1".into() })
}

fn condition2(ws: &[IntVec3], schedule: &ParameterSchedule, nu: usize) -> ConditionResult {
    if nu < 2 {
        return ConditionResult::na("needs a predecessor");
    }
    let Some(p) = schedule.step(nu as u64) else {
        return ConditionResult::exact(false, "no schedule entry".into());
    };
    let (a, b) = (&ws[nu - 2].q, &ws[nu - 1].q);
    if !a.is_positive() || b <= a {
        return ConditionResult::exact(false, format!("denominators not increasing: {a} then {b}"));
    }
    let ratio = Rational::new(b.clone(), a.clone());
    let k2 = rat_int(&(&p.k * &p.k));
    let lo = &p.b_minus * &k2;
    let hi = &p.b_plus * &k2;
    let ok = lo <= ratio && ratio <= hi;
    ConditionResult::exact(ok, format!("ratio {} in [B⁻k², B⁺k²]: {ok}", fmt_rational(&ratio)))
}

fn condition3(ws: &[IntVec3], schedule: &ParameterSchedule, nu: usize) -> ConditionResult {
    if nu < 3 {
        return ConditionResult::na("needs R_{ν−1}");
    }
    let Some(p) = schedule.step(nu as u64) else {
        return ConditionResult::exact(false, "no schedule entry".into());
    };
    let (Some(r), Some(rp)) = (radius_sq(ws, nu), radius_sq(ws, nu - 1)) else {
        return ConditionResult::exact(false, "denominators must be positive".into());
    };
    if rp.is_zero() {
        return ConditionResult::exact(false, "R_{ν−1} = 0".into());
    }
    let k2 = rat_int(&(&p.k * &p.k));
    let lo = &p.h_minus * &p.h_minus * &rp / &k2;
    let hi = &p.h_plus_sq * &rp / &k2;
    let ok = lo <= r && r <= hi;
    ConditionResult::exact(ok, format!("R_ν²/R_{{ν−1}}² = {}", fmt_rational(&(&r / &rp))))
}

fn condition6(ws: &[IntVec3], schedule: &ParameterSchedule, nu: usize) -> ConditionResult {
    if nu < 2 {
        return ConditionResult::na("needs R_ν");
    }
    let Some(p) = schedule.step(nu as u64) else {
        return ConditionResult::exact(false, "no schedule entry".into());
    };
    let Some(r) = radius_sq(ws, nu) else {
        return ConditionResult::exact(false, "q_ν must be positive".into());
    };
    let v = rat_int(&ws[nu - 1].q) * r;
    let ok = p.alpha < v && v < p.omega;
    ConditionResult::exact(ok, format!("V/π = {}", fmt_rational(&v)))
}

fn sorted(pts: impl IntoIterator<Item = IntVec3>) -> Vec<IntVec3> {
    let s: BTreeSet<IntVec3> = pts.into_iter().collect();
    s.into_iter().collect()
}

fn describe_mismatch(found: &[IntVec3], expected: &[IntVec3]) -> String {
    let extra: Vec<String> = found.iter().filter(|p| !expected.contains(p)).take(3).map(|p| p.to_string()).collect();
    let missing: Vec<String> = expected.iter().filter(|p| !found.contains(p)).map(|p| p.to_string()).collect();
    format!("extra points [{}], missing points [{}]", extra.join(", "), missing.join(", "))
}

/// `Π_ν` with its dilation factor `(1 + ε_ν)²`.
fn main_cylinder(ws: &[IntVec3], nu: usize, eps: &Rational) -> Option<(Cylinder, Rational)> {
    let w = &ws[nu - 1];
    let c = Cylinder::new(w.direction(), rat_int(&w.q), radius_sq(ws, nu)?).ok()?;
    let t = Rational::one() + eps;
    Some((c, &t * &t))
}

fn condition4(ws: &[IntVec3], schedule: &ParameterSchedule, nu: usize, enum_limit: u64) -> ConditionResult {
    if nu < 2 {
        return ConditionResult::na("needs R_ν");
    }
    let Some((eps, _)) = eps_of(schedule, nu) else {
        return ConditionResult::exact(false, "no schedule entry".into());
    };
    if !ws[nu - 1].q.is_positive() {
        return ConditionResult::exact(false, "q_ν must be positive".into());
    }
    if ws[nu - 1].q <= BigInt::from(enum_limit) {
        condition4_enumerated(ws, nu, &eps, enum_limit)
    } else {
        condition4_certified(ws, nu, &eps)
    }
}

fn expected4(ws: &[IntVec3], nu: usize) -> Vec<IntVec3> {
    let (a, b) = (&ws[nu - 2], &ws[nu - 1]);
    sorted([IntVec3::zero(), a.clone(), b.clone(), b.sub(a)])
}

fn inner_contains(c: &Cylinder, pts: &[IntVec3]) -> Option<String> {
    pts.iter()
        .find(|p| !cylinder_contains(c, p, &Rational::one()))
        .map(|p| format!("{p} is not in the undilated cylinder"))
}

pub fn condition4_enumerated(ws: &[IntVec3], nu: usize, eps: &Rational, enum_limit: u64) -> ConditionResult {
    let Some((c, dil)) = main_cylinder(ws, nu, eps) else {
        return ConditionResult::exact(false, "degenerate cylinder".into());
    };
    let found = match enumerate_cylinder_points_capped(&c.dilated(&dil), &BigInt::from(enum_limit), POINT_CAP) {
        Ok(p) => sorted(p),
        Err(e) => return ConditionResult::with_mode(false, CertMode::Enumerated, e.to_string()),
    };
    let expected = expected4(ws, nu);
    if let Some(msg) = inner_contains(&c, &expected) {
        return ConditionResult::with_mode(false, CertMode::Enumerated, msg);
    }
    let ok = found == expected;
    let detail =
        if ok { format!("{} lattice points, as required", found.len()) } else { describe_mismatch(&found, &expected) };
    ConditionResult::with_mode(ok, CertMode::Enumerated, detail)
}

/// Exact integer points of the dilated `Π_ν` through its plane section.
///
/// With `g1 = w_{ν−1}` and `g2` completing `(g1, g2, w_ν)` to a basis, the
/// cylinder is a union of translates `s + c·w_ν` of the lattice points `s` of
/// the section ellipse in the plane spanned by `g1, g2`.
pub fn section_points(ws: &[IntVec3], nu: usize, eps: &Rational) -> Result<Vec<IntVec3>, String> {
    let g1 = &ws[nu - 2];
    let g3 = &ws[nu - 1];
    let g2 = if nu >= 3 && is_unimodular(g1, &ws[nu - 3], g3) {
        ws[nu - 3].clone()
    } else {
        let mut c = complete_basis(g3, g1).ok_or("w_{ν−1}, w_ν do not extend to a basis")?;
        if !g1.q.is_positive() {
            return Err("q_{ν−1} must be positive".into());
        }
        // shift by multiples of g1 so that the frame sees q ≥ 0
        if c.q.is_negative() {
            let n = ceil(&Rational::new(-c.q.clone(), g1.q.clone()));
            c = c.add(&g1.scale(&n));
        }
        c
    };
    let frame = build_frame(g1, &g2, g3).map_err(|e| e.to_string())?;
    let x1 = rat_int(&g3.q);
    let q = rat_int(&frame.q);
    let (x2, mu) = map_F_inverse(&q, &frame.d_sq, &x1, &frame.f_over_d).map_err(|e| e.to_string())?;
    let e =
        EllipseSpec::new(q.clone(), x2, mu, frame.d_sq.clone(), Rational::one() + eps).map_err(|e| e.to_string())?;
    let pts = ellipse_lattice_points(&e, &q, &rat_int(&frame.a0), SECTION_LIMIT).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for (l, m) in pts {
        let s = g1.scale(&l).add(&g2.scale(&m));
        // 0 ≤ s.q + c·q_ν ≤ q_ν
        let lo = ceil(&Rational::new(-s.q.clone(), g3.q.clone()));
        let hi = floor(&Rational::new(&g3.q - &s.q, g3.q.clone()));
        let mut c = lo;
        while c <= hi {
            out.push(s.add(&g3.scale(&c)));
            c += 1;
        }
    }
    Ok(sorted(out))
}

pub fn condition4_certified(ws: &[IntVec3], nu: usize, eps: &Rational) -> ConditionResult {
    let Some((c, _)) = main_cylinder(ws, nu, eps) else {
        return ConditionResult::exact(false, "degenerate cylinder".into());
    };
    let found = match section_points(ws, nu, eps) {
        Ok(p) => p,
        Err(e) => return ConditionResult::with_mode(false, CertMode::Certified, e),
    };
    let expected = expected4(ws, nu);
    if let Some(msg) = inner_contains(&c, &expected) {
        return ConditionResult::with_mode(false, CertMode::Certified, msg);
    }
    let ok = found == expected;
    let detail =
        if ok { "section ellipse holds only 0, ±w_{ν−1}".into() } else { describe_mismatch(&found, &expected) };
    ConditionResult::with_mode(ok, CertMode::Certified, detail)
}

fn minus_cylinder(ws: &[IntVec3], nu: usize, eps_minus: &Rational) -> Option<(Cylinder, Rational)> {
    let w = &ws[nu - 1];
    let c = Cylinder::new(w.direction(), rat_int(&ws[nu - 2].q), radius_minus_sq(ws, nu)?).ok()?;
    let t = Rational::one() + eps_minus;
    Some((c, &t * &t))
}

fn expected5(ws: &[IntVec3], nu: usize) -> Vec<IntVec3> {
    sorted([IntVec3::zero(), ws[nu - 3].clone(), ws[nu - 2].clone()])
}

fn condition5(ws: &[IntVec3], schedule: &ParameterSchedule, nu: usize, enum_limit: u64) -> ConditionResult {
    if nu < 3 {
        return ConditionResult::na("needs R_ν⁻");
    }
    let Some((_, eps_minus)) = eps_of(schedule, nu) else {
        return ConditionResult::exact(false, "no schedule entry".into());
    };
    if !ws[nu - 2].q.is_positive() || ws[nu - 1].q <= ws[nu - 2].q {
        return ConditionResult::exact(false, "denominators not increasing".into());
    }
    if ws[nu - 1].q <= BigInt::from(enum_limit) {
        condition5_enumerated(ws, nu, &eps_minus, enum_limit)
    } else {
        condition5_certified(ws, schedule, nu, enum_limit)
    }
}

pub fn condition5_enumerated(ws: &[IntVec3], nu: usize, eps_minus: &Rational, enum_limit: u64) -> ConditionResult {
    let Some((c, dil)) = minus_cylinder(ws, nu, eps_minus) else {
        return ConditionResult::exact(false, "degenerate cylinder".into());
    };
    let found = match enumerate_cylinder_points_capped(&c.dilated(&dil), &BigInt::from(enum_limit), POINT_CAP) {
        Ok(p) => sorted(p),
        Err(e) => return ConditionResult::with_mode(false, CertMode::Enumerated, e.to_string()),
    };
    let expected = expected5(ws, nu);
    if let Some(msg) = inner_contains(&c, &expected) {
        return ConditionResult::with_mode(false, CertMode::Enumerated, msg);
    }
    let ok = found == expected;
    let detail =
        if ok { format!("{} lattice points, as required", found.len()) } else { describe_mismatch(&found, &expected) };
    ConditionResult::with_mode(ok, CertMode::Enumerated, detail)
}

/// `Π̄⁻_ν ⊂ Π̄_{ν−1}`, then Condition 4 at `ν − 1` leaves four candidates, and
/// `w_{ν−1} − w_{ν−2}` is excluded directly.
pub fn condition5_certified(
    ws: &[IntVec3],
    schedule: &ParameterSchedule,
    nu: usize,
    enum_limit: u64,
) -> ConditionResult {
    let fail = |d: String| ConditionResult::with_mode(false, CertMode::Certified, d);
    let (Some(p), Some(prev)) = (schedule.step(nu as u64), schedule.step(nu as u64 - 1)) else {
        return fail("no schedule entry".into());
    };
    let c4_prev = condition4(ws, schedule, nu - 1, enum_limit);
    if c4_prev.status != CondStatus::Pass {
        return fail("Condition 4 fails at ν − 1, containment argument unavailable".into());
    }
    let Some((c, dil)) = minus_cylinder(ws, nu, &p.eps_minus) else {
        return fail("degenerate cylinder".into());
    };
    let (Some(r), Some(rp)) = (radius_sq(ws, nu), radius_sq(ws, nu - 1)) else {
        return fail("denominators must be positive".into());
    };
    let tp = Rational::one() + &prev.epsilon;
    // R_ν + R_ν⁻(1 + ε⁻_ν) ≤ R_{ν−1}(1 + ε_{ν−1})
    if !sum_sqrt_le(&r, &(&c.radius_sq * &dil), &(&rp * &tp * &tp)) {
        return fail("containment Π̄⁻_ν ⊂ Π̄_{ν−1} not certified".into());
    }
    let diff = ws[nu - 2].sub(&ws[nu - 3]);
    if cylinder_contains(&c, &diff, &dil) {
        return fail("w_{ν−1} − w_{ν−2} lies in the dilated cylinder".into());
    }
    let expected = expected5(ws, nu);
    if let Some(msg) = inner_contains(&c, &expected) {
        return fail(msg);
    }
    ConditionResult::with_mode(true, CertMode::Certified, "containment chain and exclusion hold".into())
}

/// Whether `w` is one of the four points Condition 4 allows; used by tests.
pub fn is_condition4_point(ws: &[IntVec3], nu: usize, w: &IntVec3) -> bool {
    expected4(ws, nu).contains(w) || (w.q.is_zero() && w == &IntVec3::zero())
}
