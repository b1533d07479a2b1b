//! The inductive step: from `w_{ν−2}, w_{ν−1}, w_ν` to `w_{ν+1}`.
//!
//! Candidates are `w_{ν−2} + m·w_{ν−1} + l·w_ν`, which keeps every consecutive
//! triple unimodular. Floating point only proposes `(m, l)`; acceptance is
//! decided by exact predicates.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::conic_toolkit::CaseTag;
use crate::error::Error;
use crate::exact_numerics::{fmt_rational, rat, rat_int, to_f64, Rational};
use crate::lattice_geometry::{build_frame, Frame, IntVec3};

use super::schedule::{ParameterSchedule, StepParams};
use super::verify::{condition4_certified, condition5_certified, radius_minus_sq, radius_sq, CondStatus};

/// Rows and positions tried around the prediction, doubled on a miss.
const START_RADIUS: i64 = 3;
const MAX_RADIUS: i64 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub nu: u64,
    pub w: IntVec3,
    pub r_sq: Option<Rational>,
    pub r_minus_sq: Option<Rational>,
    pub v_over_pi: Option<Rational>,
    pub ratio: Option<Rational>,
}

impl StepRecord {
    pub fn from_history(ws: &[IntVec3], nu: usize) -> Self {
        let w = ws[nu - 1].clone();
        let r_sq = radius_sq(ws, nu);
        let v_over_pi = r_sq.as_ref().map(|r| rat_int(&w.q) * r);
        let ratio = (nu >= 2 && ws[nu - 2].q.is_positive()).then(|| Rational::new(w.q.clone(), ws[nu - 2].q.clone()));
        Self { nu: nu as u64, w, r_sq, r_minus_sq: radius_minus_sq(ws, nu), v_over_pi, ratio }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstructionState {
    pub history: Vec<StepRecord>,
}

impl ConstructionState {
    pub fn vectors(&self) -> Vec<IntVec3> {
        self.history.iter().map(|s| s.w.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    /// Frame of `(w_ν, w_{ν−1}, w_{ν−2})`, padding with `(0,1,0)` and `(0,0,1)`
    /// in front of `w_1 = (1,0,0)`.
    pub fn frame(&self) -> Result<Frame, Error> {
        let mut ws = vec![IntVec3::new(0, 0, 1), IntVec3::new(0, 1, 0)];
        ws.extend(self.vectors());
        let n = ws.len();
        if n < 3 {
            return Err(Error::Domain("frame needs w_1".into()));
        }
        build_frame(&ws[n - 1], &ws[n - 2], &ws[n - 3])
    }

    fn push(&mut self, w: IntVec3) {
        let mut ws = self.vectors();
        ws.push(w);
        let nu = ws.len();
        self.history.push(StepRecord::from_history(&ws, nu));
    }
}

pub fn seed_construction(schedule: &ParameterSchedule) -> Result<ConstructionState, Error> {
    let mut st = ConstructionState::default();
    if schedule.steps.is_empty() {
        return Ok(st);
    }
    st.push(IntVec3::new(1, 0, 0));
    let upto = schedule.steps.len().min(3) as u64;
    for nu in 2..=upto {
        inductive_step(&mut st, schedule, nu)?;
    }
    Ok(st)
}

pub fn construct(schedule: &ParameterSchedule) -> Result<ConstructionState, Error> {
    let mut st = seed_construction(schedule)?;
    for nu in (st.len() as u64 + 1)..=(schedule.steps.len() as u64) {
        inductive_step(&mut st, schedule, nu)?;
    }
    Ok(st)
}

/// Exact data of a candidate in the current frame.
struct Candidate {
    w: IntVec3,
    /// `x₁ = q_{ν+1}`.
    x1: BigInt,
    /// `V_{ν+1}/π`.
    mu: Rational,
    /// `(v/q)² + 1` with `v = Y·q²d²`.
    s: Rational,
}

fn evaluate(frame: &Frame, m: &BigInt, l: &BigInt) -> Candidate {
    let w = frame.combine(l, m, &BigInt::one());
    let x1 = w.q.clone();
    let lam = frame.volume_ratio();
    let v_over_q = (&frame.f_over_d + rat_int(m)) * &lam;
    let s = &v_over_q * &v_over_q + Rational::one();
    // μ = (v² + q²)/(x₁q²d²) = S/(x₁d²)
    let mu = if x1.is_positive() { &s / (rat_int(&x1) * &frame.d_sq) } else { Rational::zero() };
    Candidate { w, x1, mu, s }
}

/// Failure reasons, counted for the exhaustion report.
#[derive(Default)]
struct Tally(BTreeMap<&'static str, u64>);

impl Tally {
    fn hit(&mut self, why: &'static str) {
        *self.0.entry(why).or_default() += 1;
    }

    fn summary(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k}: {v}")).collect::<Vec<_>>().join(", ")
    }
}

fn cheap_checks(frame: &Frame, p: &StepParams, c: &Candidate, nu_next: u64, tally: &mut Tally) -> bool {
    if c.x1 <= frame.q {
        tally.hit("not increasing");
        return false;
    }
    if !(p.alpha < c.mu && c.mu < p.omega) {
        tally.hit("volume window");
        return false;
    }
    let k2 = rat_int(&(&p.k * &p.k));
    let lam_mu = frame.volume_ratio() * &c.mu;
    if c.s < &p.b_minus * &k2 * &lam_mu || c.s > &p.b_plus * &k2 * &lam_mu {
        tally.hit("ratio window");
        return false;
    }
    if nu_next >= 3 {
        // R²_{ν+1}/R²_ν = μ²/S
        let r = &c.mu * &c.mu / &c.s;
        if r < &p.h_minus * &p.h_minus / &k2 || r > &p.h_plus_sq / &k2 {
            tally.hit("radius window");
            return false;
        }
    }
    true
}

fn cylinder_checks(ws: &[IntVec3], schedule: &ParameterSchedule, nu_next: usize, tally: &mut Tally) -> bool {
    let p = schedule.step(nu_next as u64).expect("step exists");
    if condition4_certified(ws, nu_next, &p.epsilon).status != CondStatus::Pass {
        tally.hit("cylinder not empty");
        return false;
    }
    // the cylinder conditions at earlier steps are already settled, so the
    // enumeration threshold is irrelevant here
    if nu_next >= 3 && condition5_certified(ws, schedule, nu_next, 0).status != CondStatus::Pass {
        tally.hit("lower cylinder not empty");
        return false;
    }
    true
}

/// Floating-point guess of the target `S = (v/q)² + 1`.
fn target_s(frame: &Frame, p: &StepParams, nu_next: u64) -> Option<f64> {
    let mu = to_f64(&((&p.alpha + &p.omega) / rat(2, 1)));
    let lam = to_f64(&frame.volume_ratio());
    let k = to_f64(&rat_int(&p.k));
    let k2 = k * k;
    let mut lo = to_f64(&p.b_minus) * k2 * lam * mu;
    let mut hi = to_f64(&p.b_plus) * k2 * lam * mu;
    if nu_next >= 3 {
        let hm = to_f64(&p.h_minus);
        lo = lo.max(mu * mu * k2 / to_f64(&p.h_plus_sq));
        hi = hi.min(mu * mu * k2 / (hm * hm));
    }
    // sit near the lower end: smaller denominators, same margins
    (lo < hi).then(|| lo * (hi / lo).powf(0.1))
}

fn round_big(x: f64) -> BigInt {
    BigInt::from(x.round() as i128)
}

fn spiral(centre: &BigInt, radius: i64) -> impl Iterator<Item = BigInt> + '_ {
    (0..=2 * radius).map(move |i| {
        let off = if i % 2 == 1 { (i + 1) / 2 } else { -(i / 2) };
        centre + off
    })
}

/// Predicted `(m, l)` row and position for one row `m` (given as `None` to
/// predict it too).
struct Targeting {
    case_tag: CaseTag,
    mu_c: f64,
    s_t: f64,
    lam: f64,
    f_over_d: f64,
    a0_over_q: f64,
    g_over_q: f64,
    /// Case 2: centre of the chosen lattice gap on row 1, over `q`.
    gap_over_q: f64,
}

impl Targeting {
    fn new(frame: &Frame, p: &StepParams, s_t: f64) -> Self {
        let q = rat_int(&frame.q);
        let mu_c = to_f64(&((&p.alpha + &p.omega) / rat(2, 1)));
        let a0_over_q = to_f64(&(rat_int(&frame.a0) / &q));
        let v_over_q = (s_t - 1.0).max(0.0).sqrt();
        // gap centres a0 + (j + ½)q next to v/μ
        let j = (v_over_q / mu_c - a0_over_q - 0.5).round();
        Self {
            case_tag: p.case_tag,
            mu_c,
            s_t,
            lam: to_f64(&frame.volume_ratio()),
            f_over_d: to_f64(&frame.f_over_d),
            a0_over_q,
            g_over_q: to_f64(&(rat_int(&frame.g) / &q)),
            gap_over_q: a0_over_q + j + 0.5,
        }
    }

    fn row(&self) -> BigInt {
        let v_over_q = match self.case_tag {
            CaseTag::Case1 => (self.s_t - 1.0).max(0.0).sqrt(),
            CaseTag::Case2 => self.mu_c * self.gap_over_q,
        };
        // v/q = (f/d + m)·λ₋
        round_big(v_over_q / self.lam - self.f_over_d)
    }

    fn position(&self, frame: &Frame, m: &BigInt) -> BigInt {
        let v_over_q = to_f64(&((&frame.f_over_d + rat_int(m)) * frame.volume_ratio()));
        let s = v_over_q * v_over_q + 1.0;
        let x1_over_q = match self.case_tag {
            CaseTag::Case1 => s / (self.lam * self.mu_c),
            // centre of the row-1 chord x₂/μ on the gap centre
            CaseTag::Case2 => s * self.gap_over_q / (self.lam * v_over_q),
        };
        let m_f = m.to_f64().unwrap_or(f64::NAN);
        round_big(x1_over_q - self.g_over_q - m_f * self.a0_over_q)
    }
}

pub fn inductive_step(state: &mut ConstructionState, schedule: &ParameterSchedule, nu_next: u64) -> Result<(), Error> {
    if nu_next as usize != state.len() + 1 || nu_next < 2 {
        return Err(Error::Domain(format!("step {nu_next} does not follow {} accepted steps", state.len())));
    }
    let p = schedule.step(nu_next).ok_or_else(|| Error::Config(format!("schedule has no step {nu_next}")))?;
    let frame = state.frame()?;
    let s_t = target_s(&frame, p, nu_next)
        .ok_or_else(|| Error::Exhausted(format!("step {nu_next}: ratio and radius windows do not overlap")))?;
    let tg = Targeting::new(&frame, p, s_t);
    let m0 = tg.row();
    let mut ws = state.vectors();
    let mut tally = Tally::default();
    let mut radius = START_RADIUS;
    loop {
        for m in spiral(&m0, radius) {
            let l0 = tg.position(&frame, &m);
            for l in spiral(&l0, radius) {
                let c = evaluate(&frame, &m, &l);
                if !cheap_checks(&frame, p, &c, nu_next, &mut tally) {
                    continue;
                }
                ws.push(c.w.clone());
                if cylinder_checks(&ws, schedule, nu_next as usize, &mut tally) {
                    state.push(c.w);
                    return Ok(());
                }
                ws.pop();
            }
        }
        if radius >= MAX_RADIUS {
            break;
        }
        radius = (radius * 2).min(MAX_RADIUS);
    }
    Err(Error::Exhausted(format!(
        "step {nu_next}: no candidate within ±{MAX_RADIUS} rows/positions of (m, l) = ({m0}, {}); window (α, ω) = ({}, {}), k = {}; rejections: {}",
        tg.position(&frame, &m0),
        fmt_rational(&p.alpha),
        fmt_rational(&p.omega),
        p.k,
        tally.summary()
    )))
}
