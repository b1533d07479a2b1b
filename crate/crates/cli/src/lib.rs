//! Subcommands behind the `dspec` binary. Each `cmd_*` returns the process
//! exit code; text goes to the given writers so tests can capture it.
//!
//! Exit codes: 0 success, 1 a condition failed, 2 bad input or configuration,
//! 3 the search window was exhausted.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dspec_core::approximation_analysis::{
    analysis_table, dirichlet_estimate, inside_half_open, proposition3_check, ratio_bound_violations, ratio_stats,
    DEFAULT_TAIL_START,
};
use dspec_core::exact_numerics::{parse_rational, to_f64, Rational};
use dspec_core::record::{verify_record, RunRecord};
use dspec_core::spectrum_construction::{
    construct, make_schedule, verify_conditions, ParameterSchedule, Phi, ScheduleMode, StepRecord,
};
use dspec_core::Error;

mod plot;

pub use plot::render_svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_EXHAUSTED: i32 = 3;

pub const DEFAULT_ENUM_LIMIT: u64 = 10_000_000;

#[derive(Parser, Debug)]
#[command(name = "dspec", version, about = "Construct and certify points with a prescribed Dirichlet constant")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a run and write its record.
    Construct(ConstructArgs),
    /// Recheck every step of a record.
    Verify {
        record: PathBuf,
        /// Enumerate cylinders up to this height; defaults to the record's value.
        #[arg(long)]
        enum_limit: Option<u64>,
    },
    /// Tabulate approximants and ratios of a record.
    Analyze {
        record: PathBuf,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// First step of the tail used for the ratio estimate.
        #[arg(long, default_value_t = DEFAULT_TAIL_START)]
        tail_start: u64,
    },
    /// Draw the section geometry of one step as SVG.
    Plot {
        record: PathBuf,
        #[arg(long)]
        step: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Theorem1,
    Theorem2,
}

#[derive(Args, Debug, Clone)]
pub struct ConstructArgs {
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Target constant as NUM/DEN.
    #[arg(long)]
    pub lambda: String,
    /// Window width as NUM/DEN (theorem2).
    #[arg(long)]
    pub epsilon: Option<String>,
    /// File of `nu,value` lines giving φ (theorem1); default φ(ν) = ν².
    #[arg(long)]
    pub phi_table: Option<PathBuf>,
    #[arg(long)]
    pub steps: u64,
    #[arg(long, default_value_t = DEFAULT_ENUM_LIMIT)]
    pub enum_limit: u64,
    /// Record path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Validated construction request.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: ScheduleMode,
    pub steps: u64,
    pub enum_limit: u64,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_args(a: &ConstructArgs) -> Result<Self, Error> {
        let lambda = parse_rational(&a.lambda)?;
        let mode = match a.mode {
            ModeArg::Theorem2 => {
                if a.phi_table.is_some() {
                    return Err(Error::Config("--phi-table applies to theorem1 only".into()));
                }
                let e = a.epsilon.as_deref().ok_or_else(|| Error::Config("theorem2 needs --epsilon".into()))?;
                ScheduleMode::Theorem2 { lambda, epsilon: parse_rational(e)? }
            }
            ModeArg::Theorem1 => {
                if a.epsilon.is_some() {
                    return Err(Error::Config("--epsilon applies to theorem2 only".into()));
                }
                let phi = match &a.phi_table {
                    None => Phi::Square,
                    Some(p) => {
                        let text = fs::read_to_string(p)
                            .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                        Phi::parse_table(&text)?
                    }
                };
                ScheduleMode::Theorem1 { lambda, phi }
            }
        };
        Ok(Self { mode, steps: a.steps, enum_limit: a.enum_limit, out: a.out.clone() })
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match cli.command {
        Command::Construct(a) => match RunConfig::from_args(&a) {
            Ok(cfg) => cmd_construct(&cfg, out, err),
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_INPUT
            }
        },
        Command::Verify { record, enum_limit } => cmd_verify(&record, enum_limit, out, err),
        Command::Analyze { record, out: path, tail_start } => {
            cmd_analyze(&record, path.as_deref(), tail_start, out, err)
        }
        Command::Plot { record, step, out: path } => cmd_plot(&record, step, &path, err),
    }
}

fn write_or_print(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

pub fn cmd_construct(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let schedule = match make_schedule(cfg.mode.clone(), cfg.steps) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    let state = match construct(&schedule) {
        Ok(s) => s,
        Err(e @ Error::Exhausted(_)) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_EXHAUSTED;
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    let ws = state.vectors();
    let reports: Vec<_> = (1..=ws.len()).map(|nu| verify_conditions(&ws, &schedule, nu, cfg.enum_limit)).collect();
    let record = match RunRecord::from_run(&schedule, &state.history, &reports, cfg.enum_limit) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    if let Err(e) = write_or_print(cfg.out.as_deref(), &record.to_json(), out) {
        let _ = writeln!(err, "error: {e}");
        return EXIT_INPUT;
    }
    let mut code = EXIT_OK;
    for rep in &reports {
        if let Some(c) = rep.first_failure() {
            let _ = writeln!(err, "step {} condition {} failed: {}", rep.nu, c, rep.conditions[c - 1].detail);
            code = EXIT_FAIL;
        }
    }
    let _ = writeln!(err, "{} of {} steps accepted", ws.len(), cfg.steps);
    code
}

fn load_record(path: &Path, err: &mut dyn Write) -> Option<RunRecord> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
            return None;
        }
    };
    match RunRecord::parse(&text) {
        Ok(r) => Some(r),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            None
        }
    }
}

pub fn cmd_verify(path: &Path, enum_limit: Option<u64>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let Some(rec) = load_record(path, err) else { return EXIT_INPUT };
    let limit = enum_limit.unwrap_or(rec.parameters.enum_limit);
    let verdict = match verify_record(&rec, limit) {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    for rep in &verdict.reports {
        let status = if rep.all_pass() { "ok" } else { "FAILED" };
        let _ = writeln!(
            out,
            "step {}: {status} ({})",
            rep.nu,
            dspec_core::approximation_analysis::cert_mode_str(rep.cert_mode())
        );
    }
    if verdict.ok() {
        let _ = writeln!(out, "record verified: {} steps", verdict.reports.len());
        return EXIT_OK;
    }
    for f in &verdict.failures {
        let at = match (f.nu, f.condition) {
            (Some(nu), Some(c)) => format!("step {nu}, condition {c}"),
            (Some(nu), None) => format!("step {nu}"),
            _ => "record".to_string(),
        };
        let _ = writeln!(out, "FAIL {at}: {}", f.message);
    }
    EXIT_FAIL
}

fn dec(r: &Rational) -> String {
    format!("{:.9}", to_f64(r))
}

/// Schedule, history and reports of a parsed record.
fn rebuild(rec: &RunRecord) -> Result<(ParameterSchedule, Vec<StepRecord>), Error> {
    let schedule = make_schedule(rec.schedule_mode()?, rec.steps_requested)?;
    let ws = rec.vectors()?;
    let history = (1..=ws.len()).map(|nu| StepRecord::from_history(&ws, nu)).collect();
    Ok((schedule, history))
}

pub fn cmd_analyze(
    path: &Path,
    table_out: Option<&Path>,
    tail_start: u64,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let Some(rec) = load_record(path, err) else { return EXIT_INPUT };
    let verdict = match verify_record(&rec, rec.parameters.enum_limit) {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    let (schedule, history) = match rebuild(&rec) {
        Ok(x) => x,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    let table = analysis_table(&history, &verdict.reports, &schedule);
    if let Err(e) = write_or_print(table_out, &table, out) {
        let _ = writeln!(err, "error: {e}");
        return EXIT_INPUT;
    }
    let mut s = Vec::new();
    if !verdict.ok() {
        s.push("warning: record did not verify; figures below are unverified".to_string());
    }
    if history.is_empty() {
        s.push("empty record: no steps".to_string());
    }
    let est = dirichlet_estimate(&history, &schedule, history.len());
    if let Some(sup) = &est.running_sup {
        s.push(format!("prefix estimate of d(θ): sup of approximants in [{}, {}]", dec(&sup.lo), dec(&sup.hi)));
        if let ScheduleMode::Theorem2 { lambda, epsilon } = &schedule.mode {
            let all_in = est.approximants.iter().all(|a| inside_half_open(&a.interval, &(lambda - epsilon), lambda));
            s.push(format!("every approximant in (λ − ε, λ]: {}", if all_in { "yes" } else { "no" }));
        }
    }
    let stats = ratio_stats(&history, tail_start);
    if let Some(m) = &stats.max_ratio {
        s.push(format!("max ratio: {}", dec(m)));
    }
    if let Some(m) = &stats.m_estimate {
        s.push(format!("prefix estimate of m(θ) (ν ≥ {tail_start}): {}", dec(m)));
    }
    if !history.is_empty() {
        let v = ratio_bound_violations(&stats, &schedule);
        if v.is_empty() {
            s.push("ratio bounds: all hold".into());
        }
        for line in v {
            s.push(format!("ratio bound violated: {line}"));
        }
    }
    if let (Some(sup), Some(m)) = (&est.running_sup, stats.m_estimate.as_ref().or(stats.max_ratio.as_ref())) {
        let ok = proposition3_check(&sup.hi, m);
        s.push(format!("36·m·d² ≥ 1 audit: {}", if ok { "ok" } else { "warning" }));
    }
    for line in s {
        let _ = writeln!(out, "# {line}");
    }
    EXIT_OK
}

pub fn cmd_plot(path: &Path, step: u64, out_path: &Path, err: &mut dyn Write) -> i32 {
    let Some(rec) = load_record(path, err) else { return EXIT_INPUT };
    if step == 0 || step > rec.steps.len() as u64 {
        let _ = writeln!(err, "error: step {step} out of range 1..={}", rec.steps.len());
        return EXIT_INPUT;
    }
    let (schedule, history) = match rebuild(&rec) {
        Ok(x) => x,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    let svg = match render_svg(&history, &schedule, step as usize) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    if let Err(e) = fs::write(out_path, svg) {
        let _ = writeln!(err, "error: cannot write {}: {e}", out_path.display());
        return EXIT_INPUT;
    }
    EXIT_OK
}
