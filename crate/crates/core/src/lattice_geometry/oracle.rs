//! Brute-force best simultaneous approximations.
//!
//! `q` is a best approximation when `ψ(q) = min_p |qθ − p|` is strictly smaller
//! than `ψ(q')` for every `q' < q`. Rational θ is handled exactly; for an
//! enclosure every decision must hold for all θ in the box.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::Error;
use crate::exact_numerics::{floor, rat_int, Rational, RationalInterval};

use super::RatVec2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaEnclosure {
    pub t1: RationalInterval,
    pub t2: RationalInterval,
}

impl ThetaEnclosure {
    pub fn contains(&self, th: &RatVec2) -> bool {
        self.t1.contains(&th.v1) && self.t2.contains(&th.v2)
    }

    pub fn is_subset(&self, o: &Self) -> bool {
        self.t1.is_subset(&o.t1) && self.t2.is_subset(&o.t2)
    }
}

#[derive(Clone, Debug)]
pub enum ThetaInput {
    Exact(RatVec2),
    Enclosure(ThetaEnclosure),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BestApprox {
    pub q: u64,
    pub p1: BigInt,
    pub p2: BigInt,
    /// Exact (zero-width) for rational θ.
    pub psi_sq: RationalInterval,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TieKind {
    /// Two integer points realize ψ(q).
    MinimizerNotUnique,
    /// ψ(q) equals the current minimum without dropping below it.
    EqualToRecord,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tie {
    pub q: u64,
    pub kind: TieKind,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleReport {
    pub best: Vec<BestApprox>,
    pub ties: Vec<Tie>,
}

pub fn best_approx_oracle(theta: &ThetaInput, t: u64) -> Result<OracleReport, Error> {
    if t == 0 {
        return Err(Error::Domain("oracle needs T ≥ 1".into()));
    }
    match theta {
        ThetaInput::Exact(th) => Ok(exact_oracle(th, t)),
        ThetaInput::Enclosure(e) => enclosure_oracle(e, t),
    }
}

fn exact_oracle(th: &RatVec2, t: u64) -> OracleReport {
    // θ_i = a_i / l; residues of q·a_i modulo l carry everything
    let l = th.v1.denom().lcm(th.v2.denom());
    let a = [th.v1.numer() * (&l / th.v1.denom()), th.v2.numer() * (&l / th.v2.denom())];
    let l2 = &l * &l;
    let mut rep = OracleReport::default();
    let mut record: Option<BigInt> = None;
    for q in 1..=t {
        let qb = BigInt::from(q);
        let mut s = BigInt::zero();
        let mut p = [BigInt::zero(), BigInt::zero()];
        let mut tied = false;
        for i in 0..2 {
            let x = &qb * &a[i];
            let (fl, r) = x.div_mod_floor(&l);
            let twice = &r * 2;
            let (e, pi) = if twice <= l { (r.clone(), fl.clone()) } else { (&l - &r, fl.clone() + 1) };
            tied |= twice == l;
            s += &e * &e;
            p[i] = pi;
        }
        let better = record.as_ref().is_none_or(|m| s < *m);
        if better {
            if tied {
                rep.ties.push(Tie { q, kind: TieKind::MinimizerNotUnique });
            }
            let psi = Rational::new(s.clone(), l2.clone());
            let [p1, p2] = p;
            rep.best.push(BestApprox { q, p1, p2, psi_sq: RationalInterval::point(psi) });
            record = Some(s);
        } else if record.as_ref() == Some(&s) {
            rep.ties.push(Tie { q, kind: TieKind::EqualToRecord });
        }
    }
    rep
}

/// Bits of the fixed-point grid used by the fast enclosure path.
const GRID_BITS: u32 = 64;

struct Fixed {
    lo: [u128; 2],
    hi: [u128; 2],
}

impl Fixed {
    /// Outward-rounded box on the grid `2^-GRID_BITS`. ψ ignores integer
    /// shifts of θ, so each coordinate is reduced into its unit cell first.
    fn new(e: &ThetaEnclosure, t: u64) -> Option<Self> {
        if t >= (1u64 << 40) {
            return None;
        }
        let unit = rat_int(&(BigInt::one() << GRID_BITS as usize));
        let mut lo = [0u128; 2];
        let mut hi = [0u128; 2];
        for (i, iv) in [&e.t1, &e.t2].into_iter().enumerate() {
            let s = floor(&iv.lo);
            let l = floor(&((&iv.lo - rat_int(&s)) * &unit));
            let h = -floor(&(-(&iv.hi - rat_int(&s)) * &unit));
            // the box must stay inside one unit cell and be thin
            if h >= (BigInt::one() << GRID_BITS as usize) || (&h - &l) > BigInt::from(1u64 << 20) {
                return None;
            }
            lo[i] = l.to_u128()?;
            hi[i] = h.to_u128()?;
        }
        Some(Self { lo, hi })
    }

    /// `ψ²(q)` bounds in units of `2^-2·GRID_BITS`, or `None` when the nearest
    /// integer is not constant over the box.
    fn psi_sq(&self, q: u64) -> Option<(u128, u128)> {
        let unit: u128 = 1u128 << GRID_BITS;
        let half = unit >> 1;
        let mut s_lo = 0u128;
        let mut s_hi = 0u128;
        for i in 0..2 {
            let x_lo = q as u128 * self.lo[i];
            let x_hi = q as u128 * self.hi[i];
            let n_lo = (x_lo + half) >> GRID_BITS;
            let n_hi = (x_hi + half) >> GRID_BITS;
            // exact half-way positions are left to the exact path
            if n_lo != n_hi || (x_lo + half).is_multiple_of(unit) || (x_hi + half).is_multiple_of(unit) {
                return None;
            }
            let base = n_lo * unit;
            let e_lo = x_lo as i128 - base as i128;
            let e_hi = x_hi as i128 - base as i128;
            let (a, b) = if e_lo >= 0 {
                (e_lo as u128, e_hi as u128)
            } else if e_hi <= 0 {
                ((-e_hi) as u128, (-e_lo) as u128)
            } else {
                (0, (-e_lo).max(e_hi) as u128)
            };
            s_lo += a * a;
            s_hi += b * b;
        }
        Some((s_lo, s_hi))
    }
}

/// Exact interval evaluation of `ψ²(q)` over the box; `None` if the minimizer
/// changes inside the box.
fn exact_psi(e: &ThetaEnclosure, q: u64) -> Option<(RationalInterval, [BigInt; 2])> {
    let qr = Rational::from_integer(BigInt::from(q));
    let mut total = RationalInterval::point(Rational::zero());
    let mut p = [BigInt::zero(), BigInt::zero()];
    for (i, iv) in [&e.t1, &e.t2].into_iter().enumerate() {
        let x = iv.scale(&qr);
        let half = Rational::new(BigInt::one(), BigInt::from(2));
        let n_lo = floor(&(&x.lo + &half));
        let n_hi = floor(&(&x.hi + &half));
        if n_lo != n_hi || (&x.lo + &half).is_integer() || (&x.hi + &half).is_integer() {
            return None;
        }
        let d = x.shift(&-rat_int(&n_lo));
        total = total.add(&d.square());
        p[i] = n_lo;
    }
    Some((total, p))
}

fn enclosure_oracle(e: &ThetaEnclosure, t: u64) -> Result<OracleReport, Error> {
    let fixed = Fixed::new(e, t);
    let mut rep = OracleReport::default();
    // current record: exact interval plus its fixed-point form when known
    let mut rec: Option<(RationalInterval, Option<(u128, u128)>)> = None;
    for q in 1..=t {
        let fast = fixed.as_ref().and_then(|f| f.psi_sq(q));
        if let (Some((s_lo, s_hi)), Some((_, Some((m_lo, m_hi))))) = (&fast, &rec) {
            if s_lo > m_hi {
                continue;
            }
            if s_hi < m_lo {
                let (psi, p) = exact_psi(e, q).ok_or_else(|| undecidable(q))?;
                let [p1, p2] = p;
                rep.best.push(BestApprox { q, p1, p2, psi_sq: psi.clone() });
                rec = Some((psi, Some((*s_lo, *s_hi))));
                continue;
            }
        }
        let (psi, p) = exact_psi(e, q).ok_or_else(|| undecidable(q))?;
        let fast_form = fast;
        match &rec {
            None => {
                let [p1, p2] = p;
                rep.best.push(BestApprox { q, p1, p2, psi_sq: psi.clone() });
                rec = Some((psi, fast_form));
            }
            Some((m, _)) => {
                if psi.strictly_below(m) {
                    let [p1, p2] = p;
                    rep.best.push(BestApprox { q, p1, p2, psi_sq: psi.clone() });
                    rec = Some((psi, fast_form));
                } else if m.strictly_below(&psi) {
                    continue;
                } else {
                    return Err(undecidable(q));
                }
            }
        }
    }
    Ok(rep)
}

fn undecidable(q: u64) -> Error {
    Error::Precision(format!("enclosure too wide to decide the comparison at q = {q}"))
}
