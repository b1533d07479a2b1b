//! Certified boxes around the limit point `θ`.

use crate::error::Error;
use crate::exact_numerics::{rat, rat_int, sqrt_enclosure, RationalInterval, DEFAULT_SQRT_BITS};
use crate::lattice_geometry::{IntVec3, ThetaEnclosure};

use super::schedule::ParameterSchedule;
use super::verify::radius_sq;

/// Box centred at `p_ν/q_ν` with half-width an upper bound of `ε_ν R_ν/(2q_ν)`.
pub fn theta_enclosure(
    ws: &[IntVec3],
    schedule: &ParameterSchedule,
    nu: usize,
    extra_bits: u32,
) -> Result<ThetaEnclosure, Error> {
    if nu < 2 || nu > ws.len() {
        return Err(Error::Domain(format!("θ box needs 2 ≤ ν ≤ {}, got {nu}", ws.len())));
    }
    let p = schedule.step(nu as u64).ok_or_else(|| Error::Domain(format!("schedule has no step {nu}")))?;
    let w = &ws[nu - 1];
    let r_sq = radius_sq(ws, nu).ok_or_else(|| Error::Degenerate(format!("q_{nu} must be positive")))?;
    let r = sqrt_enclosure(&r_sq, DEFAULT_SQRT_BITS + extra_bits)?;
    let half = &p.epsilon * &r.hi / (rat(2, 1) * rat_int(&w.q));
    let c = w.direction();
    let bx = |x| RationalInterval::new(&x - &half, &x + &half);
    Ok(ThetaEnclosure { t1: bx(c.v1)?, t2: bx(c.v2)? })
}
