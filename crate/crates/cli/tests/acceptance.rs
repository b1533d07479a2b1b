//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails. Run with `--nocapture` to see the lines.

use std::path::{Path, PathBuf};

use dspec_cli::{cmd_construct, cmd_verify, RunConfig, EXIT_FAIL, EXIT_OK};
use dspec_core::approximation_analysis::*;
use dspec_core::conic_toolkit::*;
use dspec_core::exact_numerics::*;
use dspec_core::lattice_geometry::{best_approx_oracle, IntVec3, ThetaInput};
use dspec_core::record::{theta_of, verify_record, RunRecord};
use dspec_core::spectrum_construction::*;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ENUM: u64 = 10_000_000;
const SEED: u64 = 0x5eed_d15c;

struct Run {
    record: RunRecord,
    path: PathBuf,
    schedule: ParameterSchedule,
    history: Vec<StepRecord>,
    reports: Vec<ConditionReport>,
}

fn construct_via_cli(dir: &Path, name: &str, mode: ScheduleMode, steps: u64) -> Run {
    let path = dir.join(format!("{name}.json"));
    let cfg = RunConfig { mode, steps, enum_limit: ENUM, out: Some(path.clone()) };
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cmd_construct(&cfg, &mut out, &mut err);
    assert_eq!(code, EXIT_OK, "{name}: {}", String::from_utf8_lossy(&err));
    let record = RunRecord::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let schedule = make_schedule(record.schedule_mode().unwrap(), record.steps_requested).unwrap();
    let ws = record.vectors().unwrap();
    let history = (1..=ws.len()).map(|nu| StepRecord::from_history(&ws, nu)).collect();
    let verdict = verify_record(&record, ENUM).unwrap();
    Run { record, path, schedule, history, reports: verdict.reports }
}

fn accepted(r: &Run) -> bool {
    r.reports.len() == r.history.len() && r.reports.iter().all(|rep| rep.all_pass())
}

struct Line {
    pass: bool,
    text: String,
}

fn line(pass: bool, text: String) -> Line {
    Line { pass, text }
}

fn criterion1(r: &Run) -> Line {
    let verdict = verify_record(&r.record, ENUM).unwrap();
    let mut modes_ok = true;
    for (rep, h) in r.reports.iter().zip(&r.history) {
        let small = h.w.q <= BigInt::from(ENUM);
        for c in &rep.conditions[3..5] {
            if c.status == CondStatus::NotApplicable {
                continue;
            }
            let want = if small { CertMode::Enumerated } else { CertMode::Certified };
            modes_ok &= c.mode == want;
        }
    }
    let pass = r.history.len() == 8 && accepted(r) && verdict.ok() && modes_ok;
    let modes: Vec<&str> = r.reports.iter().map(|rep| cert_mode_str(rep.cert_mode())).collect();
    line(
        pass,
        format!("λ = 1/2, ε = 1/100: {} steps, conditions 1–6 all pass, modes [{}]", r.history.len(), modes.join(", ")),
    )
}

fn criterion2(r: &Run, lambda: &Rational, epsilon: &Rational) -> Line {
    let est = dirichlet_estimate(&r.history, &r.schedule, r.history.len());
    let lo = lambda - epsilon;
    let bad: Vec<u64> =
        est.approximants.iter().filter(|a| !inside_half_open(&a.interval, &lo, lambda)).map(|a| a.nu).collect();
    let pass = est.approximants.len() == r.history.len() - 1 && bad.is_empty();
    let sup = est.running_sup.map(|s| format!("[{:.9}, {:.9}]", to_f64(&s.lo), to_f64(&s.hi))).unwrap_or_default();
    line(
        pass,
        format!("{} approximants inside (λ − ε, λ] exactly, sup {sup}, outside at ν = {bad:?}", est.approximants.len()),
    )
}

fn criterion3(r: &Run) -> Line {
    let stats = ratio_stats(&r.history, DEFAULT_TAIL_START);
    let v = ratio_bound_violations(&stats, &r.schedule);
    let max = stats.max_ratio.as_ref().map(to_f64).unwrap_or(0.0);
    line(
        stats.ratios.len() == 7 && v.is_empty(),
        format!(
            "{} ratios, max {max:.6e} < 10⁶/ε² = 1e10; B⁺k² and 45/ε_ν bounds exact; violations {v:?}",
            stats.ratios.len()
        ),
    )
}

fn criterion4(r: &Run) -> Line {
    let ws = r.record.vectors().unwrap();
    let t: u64 = ws[4].q.clone().min(BigInt::from(ENUM)).try_into().unwrap();
    let theta = theta_of(&r.record).unwrap().unwrap();
    let rep = best_approx_oracle(&ThetaInput::Enclosure(theta), t).unwrap();
    let got: Vec<IntVec3> = rep.best.iter().map(|b| IntVec3::new(b.q, b.p1.clone(), b.p2.clone())).collect();
    let want: Vec<IntVec3> = ws.iter().filter(|w| w.q <= BigInt::from(t)).cloned().collect();
    let pass = rep.ties.is_empty() && got == want;
    line(
        pass,
        format!(
            "T = min(q₅, 10⁷) = {t}: oracle lists {} best approximations, expected {}, ties {}",
            got.len(),
            want.len(),
            rep.ties.len()
        ),
    )
}

fn criterion5(runs: &[&Run]) -> Line {
    let mut checked = 0;
    let mut pass = true;
    for r in runs {
        pass &= accepted(r);
        for h in &r.history {
            if let Some(v) = &h.v_over_pi {
                checked += 1;
                pass &= below_mahler_ceiling(v);
            }
        }
    }
    line(pass, format!("(V_ν/π)² ≤ 4/3 exactly at {checked} steps over {} accepted runs", runs.len()))
}

fn criterion6(r: &Run) -> Line {
    let mut pass = accepted(r) && r.history.len() == 6;
    let mut worst: Option<f64> = None;
    for h in &r.history[1..] {
        let need = rat_int(&BigInt::from(h.nu - 1)).pow(2);
        let ratio = h.ratio.clone().unwrap();
        pass &= ratio >= need;
        let slack = to_f64(&(&ratio / &need));
        worst = Some(worst.map_or(slack, |w: f64| w.min(slack)));
    }
    line(pass, format!("φ(ν) = ν², λ = 1/2: 6 steps accepted, min of q_(ν+1)/(q_ν·ν²) = {:.3e}", worst.unwrap_or(0.0)))
}

fn criterion7a(rng: &mut ChaCha8Rng) -> bool {
    (0..100).all(|_| {
        let q = rat(rng.gen_range(1..10_000), 1);
        let a = rat(rng.gen_range(0..10_000), 1);
        let d_sq = rat(rng.gen_range(1..1000), rng.gen_range(1..1000));
        let y_sq = hyperbola_intersection_x_sq(&q, &d_sq);
        // the common point lies on both boundaries (a·y − d·x)² + (q·d)² = (q·y)²
        y_sq == rat(4, 3) * &d_sq
            && [a.clone(), &a + &q].iter().all(|aa| {
                let c = aa - (rat(2, 1) * &a + &q) / rat(2, 1);
                &c * &c * &y_sq + &q * &q * &d_sq == &q * &q * &y_sq
            })
    })
}

fn criterion7b(rng: &mut ChaCha8Rng) -> bool {
    // λ on a 10⁻⁶ grid with 2/√3 − λ ≥ 10⁻⁵, boxes of width 10⁻¹²
    let top = two_over_sqrt3(DEFAULT_SQRT_BITS);
    (0..1000).all(|_| {
        let n = rng.gen_range(1..=154_690);
        let lo = rat(1_000_000 + n, 1_000_000);
        let lam = RationalInterval::new(lo.clone(), &lo + rat(1, 1_000_000_000_000)).unwrap();
        let e = epsilon_lambda(&lam).unwrap();
        e.lo > rat(3, 1) * (&top.hi - &lam.lo) && e.hi <= rat(1, 1)
    })
}

fn criterion7c(rng: &mut ChaCha8Rng) -> bool {
    (0..1000).all(|_| {
        let q = rat(rng.gen_range(1..500), 1);
        let d_sq = rat(rng.gen_range(1..500), rng.gen_range(1..500));
        let h_sq = (&q * &q * &d_sq).recip();
        let x2 = rat(rng.gen_range(-1000..1000), rng.gen_range(1..100));
        let y = rat(rng.gen_range(1..5000), rng.gen_range(1..1000));
        let (x1, y1) = map_F(&q, &h_sq, &d_sq, &x2, &y).unwrap();
        map_F_inverse(&q, &d_sq, &x1, &y1).unwrap() == (x2, y)
    })
}

/// Ellipse through `0, ±(q, 0)` and `(x₂, μd)`; the lattice is
/// `l·(q, 0) + m·(a0, d)` and row 1 sits `offset·q` left of the row centre.
fn ellipse_and_lattice(q: i64, mu: &Rational, offset: &Rational, t: Rational) -> (EllipseSpec, BigInt, BigInt) {
    let a0 = BigInt::from(q / 3);
    let qr = rat(q, 1);
    let x2 = mu * (rat_int(&a0) - offset * &qr);
    (EllipseSpec::new(qr, x2, mu.clone(), rat(1, 5), t).unwrap(), BigInt::from(q), a0)
}

fn empty_and_control(q: i64, mu: &Rational, offset: &Rational, t: Rational) -> (bool, bool) {
    let (e, qq, a0) = ellipse_and_lattice(q, mu, offset, t.clone());
    let empty = lemma5_empty(&e, &qq, &a0, 1000).unwrap();
    let (e, qq, a0) = ellipse_and_lattice(q, mu, offset, t * rat(2, 1));
    let doubled_empty = lemma5_empty(&e, &qq, &a0, 1000).unwrap();
    (empty, !doubled_empty)
}

fn criterion7d(rng: &mut ChaCha8Rng) -> (usize, usize) {
    let eps = rat(1, 400);
    let mut held = 0;
    let mut controls = 0;
    // case 1: 0 < α < μ ≤ ω < 1, any horizontal placement of row 1
    for _ in 0..100 {
        let omega = rat(rng.gen_range(3..1000), 1000);
        let mu = &omega - &eps * rat(rng.gen_range(0..100), 100);
        let offset = rat(rng.gen_range(0..1000), 1000);
        let t = dilation_coefficient(CaseTag::Case1, &omega).unwrap();
        let (e, c) = empty_and_control(rng.gen_range(10..100_000), &mu, &offset, t);
        held += e as usize;
        controls += c as usize;
    }
    // case 2: 1 < α < μ ≤ ω < 2/√3, row 1 at half a period up to 10⁻⁴ jitter
    for _ in 0..100 {
        let omega = rat(rng.gen_range(10_030..11_540), 10_000);
        let mu = &omega - &eps * rat(rng.gen_range(0..100), 100);
        let offset = rat(1, 2) + rat(rng.gen_range(-100..=100), 1_000_000);
        let t = dilation_coefficient(CaseTag::Case2, &omega).unwrap();
        let (e, c) = empty_and_control(rng.gen_range(10..100_000), &mu, &offset, t);
        held += e as usize;
        controls += c as usize;
    }
    (held, controls)
}

fn criterion7() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let a = criterion7a(&mut rng);
    let b = criterion7b(&mut rng);
    let c = criterion7c(&mut rng);
    let (held, controls) = criterion7d(&mut rng);
    let pass = a && b && c && held == 200 && controls == 200;
    line(
        pass,
        format!(
            "(a) 100 common points {}, (b) 1000 ε_λ bounds {}, (c) 1000 F round trips {}, (d) emptiness {held}/200, doubled dilation caught {controls}/200",
            ok(a),
            ok(b),
            ok(c)
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAILED"
    }
}

fn criterion8(runs: &[(&str, &Run)]) -> Line {
    let mut warnings = Vec::new();
    let mut pass = true;
    for (name, r) in runs {
        pass &= accepted(r);
        let est = dirichlet_estimate(&r.history, &r.schedule, r.history.len());
        let stats = ratio_stats(&r.history, DEFAULT_TAIL_START);
        let (Some(sup), Some(m)) = (est.running_sup, stats.m_estimate.or(stats.max_ratio)) else { continue };
        if !proposition3_check(&sup.hi, &m) {
            warnings.push(*name);
        }
    }
    line(
        pass,
        format!(
            "36·m·d² ≥ 1 audit on {} runs, warnings {warnings:?}, none escalated to a condition failure",
            runs.len()
        ),
    )
}

fn mutate(rec: &RunRecord, rng: &mut ChaCha8Rng) -> (RunRecord, String) {
    let mut bad = rec.clone();
    let nu = rng.gen_range(0..bad.steps.len());
    let c = rng.gen_range(0..3);
    let d: i64 = if rng.gen_bool(0.5) { 1 } else { -1 };
    let x = parse_int(&bad.steps[nu].w[c]).unwrap() + d;
    bad.steps[nu].w[c] = x.to_string();
    (bad, format!("ν = {}, coordinate {c}, {d:+}", nu + 1))
}

fn criterion9(r: &Run, dir: &Path) -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 9);
    let cases: Vec<(usize, RunRecord, String)> = (0..100)
        .map(|i| {
            let (rec, what) = mutate(&r.record, &mut rng);
            (i, rec, what)
        })
        .collect();
    let workers = std::thread::available_parallelism().map_or(4, |n| n.get()).min(16);
    let chunk = cases.len().div_ceil(workers);
    let missed: Vec<String> = std::thread::scope(|s| {
        let handles: Vec<_> = cases
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    let mut missed = Vec::new();
                    for (i, rec, what) in part {
                        let path = dir.join(format!("mutant{i}.json"));
                        std::fs::write(&path, rec.to_json()).unwrap();
                        let (mut out, mut err) = (Vec::new(), Vec::new());
                        if cmd_verify(&path, None, &mut out, &mut err) != EXIT_FAIL {
                            missed.push(what.clone());
                        }
                    }
                    missed
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    });
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let clean = cmd_verify(&r.path, None, &mut out, &mut err) == EXIT_OK;
    line(
        clean && missed.is_empty(),
        format!(
            "untampered record verifies; {}/100 ±1 mutations rejected by verify, missed {missed:?}",
            100 - missed.len()
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let (lambda, epsilon) = (rat(1, 2), rat(1, 100));
    let main = construct_via_cli(
        dir.path(),
        "main",
        ScheduleMode::Theorem2 { lambda: lambda.clone(), epsilon: epsilon.clone() },
        8,
    );
    let case2 =
        construct_via_cli(dir.path(), "case2", ScheduleMode::Theorem2 { lambda: rat(11, 10), epsilon: rat(1, 100) }, 6);
    let growing =
        construct_via_cli(dir.path(), "growing", ScheduleMode::Theorem1 { lambda: rat(1, 2), phi: Phi::Square }, 6);

    let lines = [
        criterion1(&main),
        criterion2(&main, &lambda, &epsilon),
        criterion3(&main),
        criterion4(&main),
        criterion5(&[&main, &case2, &growing]),
        criterion6(&growing),
        criterion7(),
        criterion8(&[("λ = 1/2", &main), ("λ = 11/10", &case2), ("φ = ν²", &growing)]),
        criterion9(&main, dir.path()),
    ];
    for (i, l) in lines.iter().enumerate() {
        println!("{} criterion {}: {}", if l.pass { "PASS" } else { "FAIL" }, i + 1, l.text);
    }
    let failed: Vec<usize> = lines.iter().enumerate().filter(|(_, l)| !l.pass).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
