//! Per-step parameters `ε_ν, (α_ν, ω_ν), k_ν` and their derived bounds.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::conic_toolkit::CaseTag;
use crate::error::Error;
use crate::exact_numerics::{
    ceil_sqrt, floor_sqrt, fmt_rational, rat, rat_int, two_over_sqrt3, Rational, DEFAULT_SQRT_BITS,
};

/// Growth requirement `q_{ν+1}/q_ν ≥ φ(ν)` for the unbounded-ratio mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Phi {
    Square,
    Table(BTreeMap<u64, Rational>),
}

impl Phi {
    pub fn value(&self, nu: u64) -> Result<Rational, Error> {
        match self {
            Phi::Square => Ok(rat_int(&BigInt::from(nu)).pow(2)),
            Phi::Table(t) => {
                t.get(&nu).cloned().ok_or_else(|| Error::Config(format!("φ table has no entry for ν = {nu}")))
            }
        }
    }

    /// Parses `nu,value` lines; blank lines and `#` comments are skipped.
    pub fn parse_table(text: &str) -> Result<Self, Error> {
        let mut t = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("φ table line {}: expected `nu,value`", i + 1)))?;
            let nu: u64 = a.trim().parse().map_err(|_| Error::Parse(format!("φ table line {}: bad ν", i + 1)))?;
            let v = crate::exact_numerics::parse_rational(b)?;
            t.insert(nu, v);
        }
        Ok(Phi::Table(t))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScheduleMode {
    /// Windows shrinking toward `λ`, ratios forced above `φ`.
    Theorem1 { lambda: Rational, phi: Phi },
    /// Constant window of width `ε/4` just below `λ`.
    Theorem2 { lambda: Rational, epsilon: Rational },
}

impl ScheduleMode {
    pub fn lambda(&self) -> &Rational {
        match self {
            ScheduleMode::Theorem1 { lambda, .. } | ScheduleMode::Theorem2 { lambda, .. } => lambda,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScheduleMode::Theorem1 { .. } => "theorem1",
            ScheduleMode::Theorem2 { .. } => "theorem2",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepParams {
    pub nu: u64,
    pub case_tag: CaseTag,
    pub epsilon: Rational,
    pub alpha: Rational,
    pub omega: Rational,
    pub k: BigInt,
    pub b_minus: Rational,
    pub b_plus: Rational,
    pub h_minus: Rational,
    pub h_plus_sq: Rational,
    /// `(K⁻)² = 9(H⁺)²/ε²`.
    pub k_minus_sq: Rational,
    pub k_plus: Rational,
    /// `ε⁻_ν = ε²_{ν−1}`.
    pub eps_minus: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParameterSchedule {
    pub mode: ScheduleMode,
    pub steps: Vec<StepParams>,
    /// `⌊24√5/ε_*⌋ + 1` in the constant-window mode, kept for reporting.
    pub k_formula: Option<BigInt>,
}

impl ParameterSchedule {
    /// Parameters of step `nu` (1-based).
    pub fn step(&self, nu: u64) -> Option<&StepParams> {
        if nu == 0 {
            return None;
        }
        self.steps.get(nu as usize - 1)
    }
}

struct Window {
    case_tag: CaseTag,
    epsilon: Rational,
    alpha: Rational,
    omega: Rational,
}

fn derive(nu: u64, prev: Option<&StepParams>, w: &Window, k: BigInt) -> StepParams {
    let (ap, wp, ep) = match prev {
        Some(p) => (p.alpha.clone(), p.omega.clone(), p.epsilon.clone()),
        None => (w.alpha.clone(), w.omega.clone(), w.epsilon.clone()),
    };
    let (a, o, e) = (&w.alpha, &w.omega, &w.epsilon);
    let five = rat(5, 1);
    let b_minus = a * a / (&wp * o);
    let b_plus = &five * o * o / (&ap * a);
    let h_minus = &ap * a * a / (&five * &wp * o * o);
    let hr = &wp * o * o / (&ap * a * a);
    let h_plus_sq = &five * &hr * &hr;
    let k_minus_sq = rat(9, 1) * &h_plus_sq / (e * e);
    let k_plus = &h_minus / (rat(4, 1) * e * e);
    StepParams {
        nu,
        case_tag: w.case_tag,
        epsilon: e.clone(),
        alpha: a.clone(),
        omega: o.clone(),
        k,
        b_minus,
        b_plus,
        h_minus,
        h_plus_sq,
        k_minus_sq,
        k_plus,
        eps_minus: &ep * &ep,
    }
}

fn k_in_range(p: &StepParams) -> bool {
    let k = rat_int(&p.k);
    &k * &k >= p.k_minus_sq && k <= p.k_plus
}

/// Checks every schedule invariant for one step, naming the first violation.
pub fn validate_step(p: &StepParams, prev: Option<&StepParams>) -> Result<(), Error> {
    let fail = |what: &str| Err(Error::Config(format!("step {}: {what}", p.nu)));
    let e = &p.epsilon;
    let one = Rational::one();
    if !e.is_positive() || *e > rat(1, 100) {
        return fail("ε must lie in (0, 1/100]");
    }
    if let Some(q) = prev {
        if *e > q.epsilon {
            return fail("ε must be non-increasing");
        }
    }
    if &p.omega - &p.alpha != *e {
        return fail("ω − α must equal ε");
    }
    match p.case_tag {
        CaseTag::Case1 => {
            if p.alpha < *e || p.omega > &one - e {
                return fail("case 1 needs (α, ω) ⊂ [ε, 1 − ε]");
            }
        }
        CaseTag::Case2 => {
            let top = &p.omega + e * rat(2, 1);
            if p.alpha < one || &top * &top > rat(4, 3) {
                return fail("case 2 needs (α, ω) ⊂ [1, 2/√3 − 2ε]");
            }
        }
    }
    if p.alpha < *e {
        return fail("ε ≤ α violated");
    }
    if p.omega > &p.alpha * rat(2, 1) {
        return fail("ω ≤ 2α violated");
    }
    if p.h_minus < rat(1, 40) || p.h_minus > rat(1, 5) {
        return fail("1/40 ≤ H⁻ ≤ 1/5 violated");
    }
    if p.h_plus_sq < rat(5, 1) || p.h_plus_sq > rat(320, 1) {
        return fail("√5 ≤ H⁺ ≤ 8√5 violated");
    }
    if p.b_minus >= p.b_plus {
        return fail("B⁻ < B⁺ violated");
    }
    let k = rat_int(&p.k);
    if &k * &k < p.k_minus_sq {
        return fail(&format!("K⁻ ≤ k violated (k = {})", p.k));
    }
    if rat_int(&p.k) > p.k_plus {
        return fail(&format!("k ≤ K⁺ violated (k = {}, K⁺ = {})", p.k, fmt_rational(&p.k_plus)));
    }
    let k = rat_int(&p.k);
    if &p.b_minus * &k * &k < rat(30, 1) / e {
        return fail("B⁻k² ≥ 30/ε violated");
    }
    if &p.h_plus_sq / (&k * &k) > e * e / rat(9, 1) {
        return fail("H⁺/k ≤ ε/3 violated");
    }
    Ok(())
}

pub fn make_schedule(mode: ScheduleMode, steps: u64) -> Result<ParameterSchedule, Error> {
    match &mode {
        ScheduleMode::Theorem2 { lambda, epsilon } => {
            let (params, k_formula) = theorem2(lambda, epsilon, steps)?;
            Ok(ParameterSchedule { mode, steps: params, k_formula: Some(k_formula) })
        }
        ScheduleMode::Theorem1 { lambda, phi } => {
            let params = theorem1(lambda, phi, steps)?;
            Ok(ParameterSchedule { mode, steps: params, k_formula: None })
        }
    }
}

fn case1_fits(alpha: &Rational, omega: &Rational, e: &Rational) -> bool {
    alpha >= e && omega <= &(Rational::one() - e)
}

fn case2_fits(alpha: &Rational, omega: &Rational, e: &Rational) -> bool {
    let top = omega + e * rat(2, 1);
    alpha >= &Rational::one() && &top * &top <= rat(4, 3)
}

fn theorem2(lambda: &Rational, epsilon: &Rational, steps: u64) -> Result<(Vec<StepParams>, BigInt), Error> {
    if !epsilon.is_positive() || *epsilon > rat(1, 100) {
        return Err(Error::Config(format!("ε = {} must lie in (0, 1/100]", fmt_rational(epsilon))));
    }
    if lambda <= epsilon {
        return Err(Error::Config(format!(
            "ε < λ violated (λ = {}, ε = {})",
            fmt_rational(lambda),
            fmt_rational(epsilon)
        )));
    }
    if lambda * lambda > rat(4, 3) {
        return Err(Error::Config(format!("λ ≤ 2/√3 violated (λ = {})", fmt_rational(lambda))));
    }
    let es = epsilon / rat(4, 1);
    // window A = (λ − 3ε*, λ − 2ε*), window B = (λ − 2ε*, λ − ε*)
    let cands = [(lambda - &es * rat(3, 1), lambda - &es * rat(2, 1)), (lambda - &es * rat(2, 1), lambda - &es)];
    let pick = |fits: fn(&Rational, &Rational, &Rational) -> bool| cands.iter().find(|(a, o)| fits(a, o, &es));
    let (case_tag, (alpha, omega)) = match (pick(case1_fits), pick(case2_fits)) {
        (Some(w), _) => (CaseTag::Case1, w.clone()),
        (None, Some(w)) => (CaseTag::Case2, w.clone()),
        (None, None) => {
            return Err(Error::Config(format!(
                "no constant window below λ = {} fits case 1 or case 2",
                fmt_rational(lambda)
            )))
        }
    };
    let win = Window { case_tag, epsilon: es.clone(), alpha, omega };
    // ⌊24√5/ε*⌋ + 1 = ⌊√(2880/ε*²)⌋ + 1
    let k_formula: BigInt = floor_sqrt(&(rat(2880, 1) / (&es * &es)))? + 1;
    let probe = derive(1, None, &win, k_formula.clone());
    let k = if k_in_range(&probe) { k_formula.clone() } else { ceil_sqrt(&probe.k_minus_sq)? };
    let mut out: Vec<StepParams> = Vec::new();
    for nu in 1..=steps {
        let p = derive(nu, out.last(), &win, k.clone());
        validate_step(&p, out.last())?;
        out.push(p);
    }
    Ok((out, k_formula))
}

fn theorem1(lambda: &Rational, phi: &Phi, steps: u64) -> Result<Vec<StepParams>, Error> {
    if lambda.is_negative() || lambda * lambda > rat(4, 3) {
        return Err(Error::Config(format!("λ ∈ [0, 2/√3] violated (λ = {})", fmt_rational(lambda))));
    }
    let one = Rational::one();
    let case_tag = if *lambda < one { CaseTag::Case1 } else { CaseTag::Case2 };
    let top = two_over_sqrt3(DEFAULT_SQRT_BITS).lo;
    let clamp = |x: Rational, lo: Rational, hi: Rational| {
        if x < lo {
            lo
        } else if x > hi {
            hi
        } else {
            x
        }
    };
    let mut out: Vec<StepParams> = Vec::new();
    for nu in 1..=steps {
        let mut e = rat(1, 100) / rat_int(&(BigInt::one() << (nu as usize - 1)));
        if let Some(p) = out.last() {
            if p.epsilon < e {
                e = p.epsilon.clone();
            }
        }
        let need = if nu > 1 { phi.value(nu - 1)? } else { Rational::zero() };
        let mut accepted = None;
        let mut last_err = None;
        for _ in 0..64 {
            let half = &e / rat(2, 1);
            let alpha = match case_tag {
                CaseTag::Case1 => clamp(lambda - &half, e.clone(), &one - &e * rat(2, 1)),
                CaseTag::Case2 => clamp(lambda - &half, one.clone(), &top - &e * rat(3, 1)),
            };
            let omega = &alpha + &e;
            let win = Window { case_tag, epsilon: e.clone(), alpha, omega };
            let probe = derive(nu, out.last(), &win, BigInt::one());
            let mut k = ceil_sqrt(&probe.k_minus_sq)?;
            if need.is_positive() {
                let kp = ceil_sqrt(&(&need / &probe.b_minus))?;
                if kp > k {
                    k = kp;
                }
            }
            let p = StepParams { k, ..probe };
            match validate_step(&p, out.last()) {
                Ok(()) => {
                    accepted = Some(p);
                    break;
                }
                Err(err) => last_err = Some(err),
            }
            e /= rat(2, 1);
        }
        match accepted {
            Some(p) => out.push(p),
            None => return Err(last_err.unwrap_or_else(|| Error::Config(format!("no feasible ε at step {nu}")))),
        }
    }
    Ok(out)
}
