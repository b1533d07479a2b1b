//! Prefix statistics of a constructed point: volume approximants, ratios of
//! consecutive denominators, and the two audits on them.
//!
//! Everything here is a statement about the computed prefix. The quantities
//! of interest are limsups, so nothing below claims to compute them.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::exact_numerics::{fmt_rational, rat, rat_int, Rational, RationalInterval};
use crate::lattice_geometry::OracleReport;
use crate::spectrum_construction::{
    CertMode, CondStatus, ConditionReport, ParameterSchedule, ScheduleMode, StepRecord,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Approximant {
    pub nu: u64,
    /// Encloses `q_ν R_ν(θ)²`.
    pub interval: RationalInterval,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirichletEstimate {
    pub approximants: Vec<Approximant>,
    /// `[max lo, max hi]` over the approximants; `None` before step 2.
    pub running_sup: Option<RationalInterval>,
    pub steps_used: usize,
}

/// `V_ν/π ± ε_ν² (V_ν/π)/30` for every step `2 ≤ ν ≤ n` that has a volume.
pub fn dirichlet_estimate(history: &[StepRecord], schedule: &ParameterSchedule, n: usize) -> DirichletEstimate {
    let n = n.min(history.len());
    let mut approximants = Vec::new();
    for rec in &history[..n] {
        let (Some(v), Some(p)) = (&rec.v_over_pi, schedule.step(rec.nu)) else {
            continue;
        };
        let r = &p.epsilon * &p.epsilon * v / rat(30, 1);
        let interval = RationalInterval { lo: v - &r, hi: v + &r };
        approximants.push(Approximant { nu: rec.nu, interval });
    }
    let running_sup = approximants
        .iter()
        .map(|a| a.interval.clone())
        .reduce(|s, i| RationalInterval { lo: s.lo.max(i.lo), hi: s.hi.max(i.hi) });
    DirichletEstimate { approximants, running_sup, steps_used: n }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioStats {
    /// `(ν, q_ν/q_{ν−1})` for `ν ≥ 2`.
    pub ratios: Vec<(u64, Rational)>,
    pub max_ratio: Option<Rational>,
    /// Max over `ν ≥ tail_start`, the prefix stand-in for `m(θ)`.
    pub m_estimate: Option<Rational>,
}

pub const DEFAULT_TAIL_START: u64 = 4;

pub fn ratio_stats(history: &[StepRecord], tail_start: u64) -> RatioStats {
    let ratios: Vec<(u64, Rational)> = history.iter().filter_map(|r| Some((r.nu, r.ratio.clone()?))).collect();
    let max_ratio = ratios.iter().map(|(_, r)| r.clone()).max();
    let m_estimate = ratios.iter().filter(|(nu, _)| *nu >= tail_start).map(|(_, r)| r.clone()).max();
    RatioStats { ratios, max_ratio, m_estimate }
}

/// Violations of the ratio bounds the schedule promises; empty when all hold.
///
/// Constant windows: `ratio < 10⁶/ε²`, `B⁺k² ≤ 6·10⁴/ε_*²` with `ε_* = ε/4`, and
/// `ratio ≥ 45/ε_ν`. Growing ratios: `q_{ν+1}/q_ν ≥ φ(ν)`.
pub fn ratio_bound_violations(stats: &RatioStats, schedule: &ParameterSchedule) -> Vec<String> {
    let mut out = Vec::new();
    for (nu, r) in &stats.ratios {
        let Some(p) = schedule.step(*nu) else {
            out.push(format!("ν = {nu}: no schedule entry"));
            continue;
        };
        match &schedule.mode {
            ScheduleMode::Theorem2 { epsilon, .. } => {
                let cap = rat(1_000_000, 1) / (epsilon * epsilon);
                if r >= &cap {
                    out.push(format!("ν = {nu}: ratio {} ≥ 10⁶/ε²", fmt_rational(r)));
                }
                let es = epsilon / rat(4, 1);
                let bk = &p.b_plus * rat_int(&(&p.k * &p.k));
                if bk > rat(60_000, 1) / (&es * &es) {
                    out.push(format!("ν = {nu}: B⁺k² = {} above 6·10⁴/ε_*²", fmt_rational(&bk)));
                }
            }
            ScheduleMode::Theorem1 { phi, .. } => match phi.value(nu - 1) {
                Ok(f) if r < &f => {
                    out.push(format!("ν = {nu}: ratio {} below φ({}) = {}", fmt_rational(r), nu - 1, fmt_rational(&f)))
                }
                Ok(_) => {}
                Err(e) => out.push(format!("ν = {nu}: {e}")),
            },
        }
        if r < &(rat(45, 1) / &p.epsilon) {
            out.push(format!("ν = {nu}: ratio {} below 45/ε_ν", fmt_rational(r)));
        }
    }
    out
}

/// `m_lo ≥ 1/(36 d_hi²)`, i.e. `36 m_lo d_hi² ≥ 1`. False for `d_hi ≤ 0`.
pub fn proposition3_check(d_hi: &Rational, m_lo: &Rational) -> bool {
    d_hi.is_positive() && m_lo * rat(36, 1) * d_hi * d_hi >= Rational::one()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GammaVerdict {
    /// `q ψ(q)² > γ²` at every best approximation up to the horizon.
    Holds,
    /// First best approximation with `q ψ(q)² ≤ γ²`.
    FailsAt(u64),
    /// The enclosure straddles `γ²` at this `q`.
    UndecidedAt(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prop1Row {
    pub gamma: Rational,
    pub verdict: GammaVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prop1Report {
    pub rows: Vec<Prop1Row>,
    /// Largest ratio of consecutive best-approximation denominators.
    pub max_ratio: Option<Rational>,
}

/// Tests `min_p |qθ − p| > γ/√q` over every `q` up to the oracle horizon.
///
/// Checking the best approximations suffices: a failure at any `q` is a failure
/// at the last best approximation not exceeding it.
pub fn proposition1_report(oracle: &OracleReport, gamma_grid: &[Rational]) -> Prop1Report {
    let rows = gamma_grid
        .iter()
        .map(|g| {
            let g2 = g * g;
            let mut verdict = GammaVerdict::Holds;
            for b in &oracle.best {
                let q = rat_int(&BigInt::from(b.q));
                if &q * &b.psi_sq.hi <= g2 {
                    verdict = GammaVerdict::FailsAt(b.q);
                    break;
                }
                if &q * &b.psi_sq.lo <= g2 {
                    verdict = GammaVerdict::UndecidedAt(b.q);
                    break;
                }
            }
            Prop1Row { gamma: g.clone(), verdict }
        })
        .collect();
    let max_ratio = oracle.best.windows(2).map(|w| Rational::new(BigInt::from(w[1].q), BigInt::from(w[0].q))).max();
    Prop1Report { rows, max_ratio }
}

pub const TABLE_HEADER: &str =
    "nu\tq\tratio\tR_sq\tV_over_pi\tapprox_lo\tapprox_hi\tcond_1\tcond_2\tcond_3\tcond_4\tcond_5\tcond_6\tcert_mode";

fn status_str(s: CondStatus) -> &'static str {
    match s {
        CondStatus::Pass => "pass",
        CondStatus::Fail => "fail",
        CondStatus::NotApplicable => "na",
    }
}

pub fn cert_mode_str(m: CertMode) -> &'static str {
    match m {
        CertMode::Exact => "exact",
        CertMode::Enumerated => "enumerated",
        CertMode::Certified => "certified",
    }
}

/// Tab-separated table, one row per step; empty cells for undefined values.
pub fn analysis_table(history: &[StepRecord], reports: &[ConditionReport], schedule: &ParameterSchedule) -> String {
    let est = dirichlet_estimate(history, schedule, history.len());
    let opt = |r: &Option<Rational>| r.as_ref().map(fmt_rational).unwrap_or_default();
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for rec in history {
        let approx = est.approximants.iter().find(|a| a.nu == rec.nu);
        let (lo, hi) = approx.map(|a| (fmt_rational(&a.interval.lo), fmt_rational(&a.interval.hi))).unwrap_or_default();
        let _ = write!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            rec.nu,
            rec.w.q,
            opt(&rec.ratio),
            opt(&rec.r_sq),
            opt(&rec.v_over_pi),
            lo,
            hi
        );
        match reports.iter().find(|r| r.nu == rec.nu) {
            Some(rep) => {
                for c in &rep.conditions {
                    let _ = write!(out, "\t{}", status_str(c.status));
                }
                let _ = write!(out, "\t{}", cert_mode_str(rep.cert_mode()));
            }
            None => out.push_str(&"\t".repeat(7)),
        }
        out.push('\n');
    }
    out
}

/// Whether `(x)² ≤ 4/3`, the Mahler ceiling in squared form.
pub fn below_mahler_ceiling(x: &Rational) -> bool {
    x.is_negative() || x * x <= rat(4, 3)
}

/// Whether the interval lies in `(lo, hi]`.
pub fn inside_half_open(i: &RationalInterval, lo: &Rational, hi: &Rational) -> bool {
    &i.lo > lo && &i.hi <= hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice_geometry::{best_approx_oracle, RatVec2, ThetaInput};
    use num_traits::Zero;

    #[test]
    fn proposition3_boundary_and_tension() {
        assert!(proposition3_check(&rat(1, 6), &rat(1, 1)));
        assert!(!proposition3_check(&rat(1, 60), &rat(50, 1)));
        assert!(!proposition3_check(&Rational::zero(), &rat(50, 1)));
    }

    #[test]
    fn rational_point_fails_bad_condition_at_six() {
        let th = ThetaInput::Exact(RatVec2::new(rat(1, 2), rat(1, 3)));
        let rep = best_approx_oracle(&th, 20).unwrap();
        let r = proposition1_report(&rep, &[rat(1, 1000), rat(1, 10)]);
        for row in &r.rows {
            assert_eq!(row.verdict, GammaVerdict::FailsAt(6));
        }
    }
}
