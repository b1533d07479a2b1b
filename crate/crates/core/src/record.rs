//! Versioned JSON run records.
//!
//! Integers are decimal strings and rationals are `"num/den"` strings, so a
//! record means the same thing on every platform. Verification rebuilds the
//! schedule from the stored parameters and rechecks every step from the raw
//! vectors alone.

use serde::{Deserialize, Serialize};

use crate::conic_toolkit::CaseTag;
use crate::error::Error;
use crate::exact_numerics::{fmt_rational, parse_int, parse_rational, Rational};
use crate::lattice_geometry::{IntVec3, ThetaEnclosure};
use crate::spectrum_construction::{
    make_schedule, theta_enclosure, verify_conditions, CertMode, CondStatus, ConditionReport, ParameterSchedule, Phi,
    ScheduleMode, StepRecord,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiEntry {
    pub nu: u64,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameters {
    pub lambda: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
    /// Growth table of the unbounded-ratio mode; absent means `φ(ν) = ν²`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_table: Option<Vec<PhiEntry>>,
    pub enum_limit: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub nu: u64,
    pub case: String,
    pub epsilon: String,
    pub alpha: String,
    pub omega: String,
    pub k: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionEntry {
    pub id: u8,
    pub status: CondStatus,
    pub mode: CertMode,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepEntry {
    pub nu: u64,
    pub w: [String; 3],
    pub r_sq: Option<String>,
    pub r_minus_sq: Option<String>,
    pub v_over_pi: Option<String>,
    pub ratio: Option<String>,
    pub conditions: Vec<ConditionEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaEntry {
    pub nu: u64,
    pub t1: [String; 2],
    pub t2: [String; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub mode: String,
    pub parameters: Parameters,
    pub steps_requested: u64,
    pub schedule: Vec<ScheduleEntry>,
    pub steps: Vec<StepEntry>,
    pub theta: Option<ThetaEntry>,
}

fn case_name(c: CaseTag) -> &'static str {
    match c {
        CaseTag::Case1 => "case1",
        CaseTag::Case2 => "case2",
    }
}

fn opt(r: &Option<Rational>) -> Option<String> {
    r.as_ref().map(fmt_rational)
}

fn schedule_entries(s: &ParameterSchedule) -> Vec<ScheduleEntry> {
    s.steps
        .iter()
        .map(|p| ScheduleEntry {
            nu: p.nu,
            case: case_name(p.case_tag).into(),
            epsilon: fmt_rational(&p.epsilon),
            alpha: fmt_rational(&p.alpha),
            omega: fmt_rational(&p.omega),
            k: p.k.to_string(),
        })
        .collect()
}

fn step_entry(rec: &StepRecord, rep: &ConditionReport) -> StepEntry {
    StepEntry {
        nu: rec.nu,
        w: [rec.w.q.to_string(), rec.w.p1.to_string(), rec.w.p2.to_string()],
        r_sq: opt(&rec.r_sq),
        r_minus_sq: opt(&rec.r_minus_sq),
        v_over_pi: opt(&rec.v_over_pi),
        ratio: opt(&rec.ratio),
        conditions: rep
            .conditions
            .iter()
            .enumerate()
            .map(|(i, c)| ConditionEntry { id: i as u8 + 1, status: c.status, mode: c.mode, detail: c.detail.clone() })
            .collect(),
    }
}

fn theta_entry(nu: usize, t: &ThetaEnclosure) -> ThetaEntry {
    ThetaEntry {
        nu: nu as u64,
        t1: [fmt_rational(&t.t1.lo), fmt_rational(&t.t1.hi)],
        t2: [fmt_rational(&t.t2.lo), fmt_rational(&t.t2.hi)],
    }
}

/// The θ box stored with a run: the one at the last step, when there is one.
pub fn final_theta(ws: &[IntVec3], schedule: &ParameterSchedule) -> Result<Option<ThetaEnclosure>, Error> {
    if ws.len() < 2 {
        return Ok(None);
    }
    theta_enclosure(ws, schedule, ws.len(), 0).map(Some)
}

impl RunRecord {
    pub fn from_run(
        schedule: &ParameterSchedule,
        history: &[StepRecord],
        reports: &[ConditionReport],
        enum_limit: u64,
    ) -> Result<Self, Error> {
        let (epsilon, phi_table) = match &schedule.mode {
            ScheduleMode::Theorem2 { epsilon, .. } => (Some(fmt_rational(epsilon)), None),
            ScheduleMode::Theorem1 { phi: Phi::Square, .. } => (None, None),
            ScheduleMode::Theorem1 { phi: Phi::Table(t), .. } => {
                (None, Some(t.iter().map(|(nu, v)| PhiEntry { nu: *nu, value: fmt_rational(v) }).collect()))
            }
        };
        let ws: Vec<IntVec3> = history.iter().map(|r| r.w.clone()).collect();
        let theta = final_theta(&ws, schedule)?.map(|t| theta_entry(ws.len(), &t));
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            mode: schedule.mode.name().into(),
            parameters: Parameters { lambda: fmt_rational(schedule.mode.lambda()), epsilon, phi_table, enum_limit },
            steps_requested: schedule.steps.len() as u64,
            schedule: schedule_entries(schedule),
            steps: history.iter().zip(reports).map(|(h, r)| step_entry(h, r)).collect(),
            theta,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes") + "\n"
    }

    /// Parses and checks the shape: version, step count, contiguous `ν`.
    pub fn parse(text: &str) -> Result<Self, Error> {
        let rec: RunRecord = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        if rec.schema_version != SCHEMA_VERSION {
            return Err(Error::Malformed(format!("unsupported schema_version {}", rec.schema_version)));
        }
        if rec.steps.len() as u64 != rec.steps_requested {
            return Err(Error::Malformed(format!(
                "{} steps recorded, {} requested",
                rec.steps.len(),
                rec.steps_requested
            )));
        }
        if rec.schedule.len() as u64 != rec.steps_requested {
            return Err(Error::Malformed(format!("schedule lists {} steps", rec.schedule.len())));
        }
        for (i, s) in rec.steps.iter().enumerate() {
            if s.nu != i as u64 + 1 {
                return Err(Error::Malformed(format!("step {} is labelled ν = {}", i + 1, s.nu)));
            }
        }
        rec.schedule_mode()?;
        rec.vectors()?;
        Ok(rec)
    }

    pub fn schedule_mode(&self) -> Result<ScheduleMode, Error> {
        let malformed = |e: Error| Error::Malformed(e.to_string());
        let lambda = parse_rational(&self.parameters.lambda).map_err(malformed)?;
        match self.mode.as_str() {
            "theorem2" => {
                let e = self.parameters.epsilon.as_deref().ok_or_else(|| Error::Malformed("missing epsilon".into()))?;
                Ok(ScheduleMode::Theorem2 { lambda, epsilon: parse_rational(e).map_err(malformed)? })
            }
            "theorem1" => {
                let phi = match &self.parameters.phi_table {
                    None => Phi::Square,
                    Some(t) => {
                        let mut m = std::collections::BTreeMap::new();
                        for e in t {
                            m.insert(e.nu, parse_rational(&e.value).map_err(malformed)?);
                        }
                        Phi::Table(m)
                    }
                };
                Ok(ScheduleMode::Theorem1 { lambda, phi })
            }
            other => Err(Error::Malformed(format!("unknown mode `{other}`"))),
        }
    }

    pub fn vectors(&self) -> Result<Vec<IntVec3>, Error> {
        self.steps
            .iter()
            .map(|s| {
                let c = |x: &str| parse_int(x).map_err(|e| Error::Malformed(e.to_string()));
                Ok(IntVec3 { q: c(&s.w[0])?, p1: c(&s.w[1])?, p2: c(&s.w[2])? })
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub nu: Option<u64>,
    /// Condition number, when the failure is one.
    pub condition: Option<usize>,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct RecordVerdict {
    pub reports: Vec<ConditionReport>,
    pub failures: Vec<Failure>,
}

impl RecordVerdict {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Rebuilds the schedule and rechecks every step and stored value.
///
/// Configuration problems in the stored parameters make the record malformed;
/// everything else is reported as a failure.
pub fn verify_record(rec: &RunRecord, enum_limit: u64) -> Result<RecordVerdict, Error> {
    let mode = rec.schedule_mode()?;
    let schedule = make_schedule(mode, rec.steps_requested).map_err(|e| Error::Malformed(e.to_string()))?;
    let ws = rec.vectors()?;
    let mut failures = Vec::new();
    if schedule_entries(&schedule) != rec.schedule {
        failures.push(Failure {
            nu: None,
            condition: None,
            message: "stored schedule differs from the rebuilt one".into(),
        });
    }
    let mut reports = Vec::new();
    for nu in 1..=ws.len() {
        let rep = verify_conditions(&ws, &schedule, nu, enum_limit);
        for (i, c) in rep.conditions.iter().enumerate() {
            if !c.passed() {
                failures.push(Failure { nu: Some(nu as u64), condition: Some(i + 1), message: c.detail.clone() });
            }
        }
        let fresh = StepRecord::from_history(&ws, nu);
        let stored = &rec.steps[nu - 1];
        let same = opt(&fresh.r_sq) == stored.r_sq
            && opt(&fresh.r_minus_sq) == stored.r_minus_sq
            && opt(&fresh.v_over_pi) == stored.v_over_pi
            && opt(&fresh.ratio) == stored.ratio;
        if !same {
            failures.push(Failure {
                nu: Some(nu as u64),
                condition: None,
                message: "stored R², V/π or ratio differs from the recomputed value".into(),
            });
        }
        reports.push(rep);
    }
    let theta = final_theta(&ws, &schedule).ok().flatten().map(|t| theta_entry(ws.len(), &t));
    if theta != rec.theta {
        failures.push(Failure {
            nu: None,
            condition: None,
            message: "stored θ enclosure differs from the recomputed one".into(),
        });
    }
    Ok(RecordVerdict { reports, failures })
}

/// Parses the stored θ box.
pub fn theta_of(rec: &RunRecord) -> Result<Option<ThetaEnclosure>, Error> {
    let Some(t) = &rec.theta else { return Ok(None) };
    let iv = |p: &[String; 2]| -> Result<crate::exact_numerics::RationalInterval, Error> {
        crate::exact_numerics::RationalInterval::new(parse_rational(&p[0])?, parse_rational(&p[1])?)
    };
    Ok(Some(ThetaEnclosure { t1: iv(&t.t1)?, t2: iv(&t.t2)? }))
}
