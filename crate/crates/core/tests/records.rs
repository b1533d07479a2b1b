use std::sync::OnceLock;

use dspec_core::approximation_analysis::*;
use dspec_core::exact_numerics::*;
use dspec_core::lattice_geometry::{best_approx_oracle, ThetaInput};
use dspec_core::record::*;
use dspec_core::spectrum_construction::*;
use dspec_core::Error;

const ENUM: u64 = 10_000_000;

struct Run {
    schedule: ParameterSchedule,
    history: Vec<StepRecord>,
    reports: Vec<ConditionReport>,
}

fn run() -> &'static Run {
    static RUN: OnceLock<Run> = OnceLock::new();
    RUN.get_or_init(|| {
        let schedule = make_schedule(ScheduleMode::Theorem2 { lambda: rat(1, 2), epsilon: rat(1, 100) }, 5).unwrap();
        let state = construct(&schedule).unwrap();
        let ws = state.vectors();
        let reports = (1..=ws.len()).map(|nu| verify_conditions(&ws, &schedule, nu, ENUM)).collect();
        Run { schedule, history: state.history, reports }
    })
}

fn record() -> RunRecord {
    let r = run();
    RunRecord::from_run(&r.schedule, &r.history, &r.reports, ENUM).unwrap()
}

#[test]
fn round_trip_and_reverify() {
    let rec = record();
    let text = rec.to_json();
    let back = RunRecord::parse(&text).unwrap();
    assert_eq!(back, rec);
    assert_eq!(back.to_json(), text);
    let v = verify_record(&back, ENUM).unwrap();
    assert!(v.ok(), "{:?}", v.failures);
    assert_eq!(v.reports.len(), 5);
    assert_eq!(back.steps[0].w, ["1".to_string(), "0".into(), "0".into()]);
    assert!(back.theta.is_some());
}

#[test]
fn malformed_records_are_rejected() {
    let text = record().to_json();
    let mut json: serde_json::Value = serde_json::from_str(&text).unwrap();
    let bad = |f: &dyn Fn(&mut serde_json::Value)| {
        let mut j = json.clone();
        f(&mut j);
        RunRecord::parse(&j.to_string())
    };
    type Edit = Box<dyn Fn(&mut serde_json::Value)>;
    let cases: Vec<(&str, Edit)> = vec![
        ("version", Box::new(|j| j["schema_version"] = 2.into())),
        ("count", Box::new(|j| j["steps_requested"] = 6.into())),
        ("nu", Box::new(|j| j["steps"][2]["nu"] = 7.into())),
        ("mode", Box::new(|j| j["mode"] = "bogus".into())),
        ("int", Box::new(|j| j["steps"][1]["w"][0] = "12x".into())),
        ("lambda", Box::new(|j| j["parameters"]["lambda"] = "1/0".into())),
        ("epsilon", Box::new(|j| j["parameters"]["epsilon"] = serde_json::Value::Null)),
        (
            "missing",
            Box::new(|j| {
                j.as_object_mut().unwrap().remove("steps");
            }),
        ),
    ];
    for (name, f) in &cases {
        assert!(matches!(bad(f.as_ref()), Err(Error::Malformed(_))), "{name}");
    }
    assert!(matches!(RunRecord::parse(&text[..text.len() / 2]), Err(Error::Malformed(_))));

    // shape is fine, parameters are not: verification refuses rather than judges
    json["parameters"]["epsilon"] = "1/2".into();
    let rec = RunRecord::parse(&json.to_string()).unwrap();
    assert!(matches!(verify_record(&rec, ENUM), Err(Error::Malformed(_))));
}

#[test]
fn stored_values_are_checked() {
    let base = record();

    let mut rec = base.clone();
    rec.steps[3].r_sq = Some("1/3".into());
    let v = verify_record(&rec, ENUM).unwrap();
    assert_eq!(v.failures.len(), 1);
    assert_eq!((v.failures[0].nu, v.failures[0].condition), (Some(4), None));

    let mut rec = base.clone();
    rec.schedule[0].k = "2726".into();
    assert!(!verify_record(&rec, ENUM).unwrap().ok());

    let mut rec = base.clone();
    rec.theta.as_mut().unwrap().t1[0] = "0/1".into();
    assert!(!verify_record(&rec, ENUM).unwrap().ok());

    // the stored condition table is informational; verification recomputes it
    let mut rec = base;
    rec.steps[2].conditions[0].detail = "edited".into();
    assert!(verify_record(&rec, ENUM).unwrap().ok());
}

#[test]
fn tampered_vector_is_caught() {
    let mut rec = record();
    let q: i64 = rec.steps[2].w[0].parse().unwrap();
    rec.steps[2].w[0] = (q + 1).to_string();
    let v = verify_record(&rec, ENUM).unwrap();
    assert!(v.failures.iter().any(|f| f.condition.is_some()), "{:?}", v.failures);
}

#[test]
fn approximants_sit_below_lambda() {
    let r = run();
    let est = dirichlet_estimate(&r.history, &r.schedule, r.history.len());
    assert_eq!(est.approximants.len(), 4);
    assert_eq!(est.approximants[0].nu, 2);
    for a in &est.approximants {
        assert!(inside_half_open(&a.interval, &rat(49, 100), &rat(1, 2)), "ν = {}: {}", a.nu, a.interval);
        assert!(below_mahler_ceiling(&a.interval.hi));
    }
    let sup = est.running_sup.unwrap();
    assert!(sup.lo <= sup.hi && sup.hi <= rat(1, 2));
    assert!(dirichlet_estimate(&r.history[..1], &r.schedule, 1).running_sup.is_none());
}

#[test]
fn ratios_respect_their_bounds() {
    let r = run();
    let stats = ratio_stats(&r.history, DEFAULT_TAIL_START);
    assert_eq!(stats.ratios.len(), 4);
    assert!(stats.m_estimate.is_some() && stats.m_estimate <= stats.max_ratio);
    assert!(ratio_bound_violations(&stats, &r.schedule).is_empty());
    // 8653144/1 at ν = 2
    assert_eq!(stats.ratios[0], (2, rat(8_653_144, 1)));

    let mut inflated = stats.clone();
    inflated.ratios[1].1 = rat(20_000_000_000, 1);
    assert_eq!(ratio_bound_violations(&inflated, &r.schedule).len(), 1);
}

#[test]
fn table_has_a_row_per_step() {
    let r = run();
    let t = analysis_table(&r.history, &r.reports, &r.schedule);
    let lines: Vec<&str> = t.lines().collect();
    assert_eq!(lines[0], TABLE_HEADER);
    assert_eq!(lines.len(), 6);
    let cols = TABLE_HEADER.split('\t').count();
    for l in &lines[1..] {
        assert_eq!(l.split('\t').count(), cols, "{l}");
    }
    assert!(lines[1].starts_with("1\t1\t\t"));
    assert!(lines[1].ends_with("na\tna\tna\tna\tna\tna\texact"));
    assert!(lines[2].ends_with("enumerated"));
    assert!(lines[5].ends_with("certified"));
    assert!(!lines[3].contains("fail"));
}

#[test]
fn half_open_and_ceiling_edges() {
    let iv = |a, b| RationalInterval::new(a, b).unwrap();
    assert!(inside_half_open(&iv(rat(1, 3), rat(1, 2)), &rat(0, 1), &rat(1, 2)));
    assert!(!inside_half_open(&iv(rat(0, 1), rat(1, 2)), &rat(0, 1), &rat(1, 2)));
    assert!(!inside_half_open(&iv(rat(1, 3), rat(2, 3)), &rat(0, 1), &rat(1, 2)));
    assert!(below_mahler_ceiling(&rat(1154, 1000)));
    assert!(!below_mahler_ceiling(&rat(1155, 1000)));
}

#[test]
fn bad_approximability_audit_on_the_constructed_point() {
    let rec = record();
    let theta = theta_of(&rec).unwrap().unwrap();
    let q3: u64 = rec.steps[2].w[0].parse().unwrap();
    // q₃ is far too large to scan; the horizon stops at q₂·10
    let q2: u64 = rec.steps[1].w[0].parse().unwrap();
    assert!(q3 > q2 * 10);
    let oracle = best_approx_oracle(&ThetaInput::Enclosure(theta), q2 * 10).unwrap();
    assert!(oracle.best.iter().any(|b| b.q == q2));
    let rep = proposition1_report(&oracle, &[rat(1, 1_000_000), rat(1, 1)]);
    assert_eq!(rep.rows[0].verdict, GammaVerdict::Holds);
    assert!(matches!(rep.rows[1].verdict, GammaVerdict::FailsAt(_)));
    assert!(rep.max_ratio.unwrap() >= rat(q2 as i64, 1));
}
