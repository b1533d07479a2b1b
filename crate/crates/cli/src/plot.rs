//! Hand-written SVG of one step. Fixed 800×600 canvas, every number printed
//! with three decimals, so the same record always gives the same bytes.
//!
//! Left panel: the plane spanned by `w_{ν−1}` and its partner, cut by `Π_ν`.
//! Coordinates are sheared so the section ellipse is axis-aligned:
//! `X = (x − m·x₂/y₂)/q_{ν−1}` across, lattice row `m` up, 72 px per unit.
//! Right panel: the candidate `w_ν` in the plane `(q_ν/q_{ν−1}/k², (v/q)/k)`,
//! with the volume curves `μ = α, ω` and the ratio window `B⁻ ≤ X ≤ B⁺`.

use std::fmt::Write as _;

use dspec_core::conic_toolkit::{ellipse_contains, map_F_inverse, EllipseSpec};
use dspec_core::exact_numerics::{ceil, floor, rat, rat_int, to_f64, Rational};
use dspec_core::lattice_geometry::{build_frame, complete_basis, is_unimodular, IntVec3};
use dspec_core::spectrum_construction::{ConstructionState, ParameterSchedule, StepRecord};
use dspec_core::Error;
use num_traits::{One, Signed};

const W: f64 = 800.0;
const H: f64 = 600.0;
const UNIT: f64 = 72.0;
const SPAN: i64 = 2;

struct Svg(String);

impl Svg {
    fn new(title: &str) -> Self {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W:.0}" height="{H:.0}" viewBox="0 0 {W:.0} {H:.0}">"#
        );
        let _ = writeln!(s, r#"<rect x="0" y="0" width="{W:.0}" height="{H:.0}" fill="white"/>"#);
        let mut me = Svg(s);
        me.text(20.0, 30.0, 16, title);
        me
    }

    fn text(&mut self, x: f64, y: f64, size: u32, t: &str) {
        let t = t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
        let _ =
            writeln!(self.0, r#"<text x="{x:.3}" y="{y:.3}" font-family="monospace" font-size="{size}">{t}</text>"#);
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, style: &str) {
        let _ = writeln!(self.0, r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" {style}/>"#);
    }

    fn dot(&mut self, x: f64, y: f64, r: f64, style: &str) {
        let _ = writeln!(self.0, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{r:.3}" {style}/>"#);
    }

    fn ellipse(&mut self, cx: f64, cy: f64, rx: f64, ry: f64, style: &str) {
        let _ = writeln!(self.0, r#"<ellipse cx="{cx:.3}" cy="{cy:.3}" rx="{rx:.3}" ry="{ry:.3}" {style}/>"#);
    }

    fn polyline(&mut self, pts: &[(f64, f64)], style: &str) {
        let p: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
        let _ = writeln!(self.0, r#"<polyline points="{}" fill="none" {style}/>"#, p.join(" "));
    }

    fn finish(mut self) -> String {
        self.0.push_str("</svg>\n");
        self.0
    }
}

const AXIS: &str = r##"stroke="#999" stroke-width="1""##;
const GRID_PT: &str = r##"fill="#bbb""##;
const HIT_PT: &str = r##"fill="#c0392b""##;

pub fn render_svg(history: &[StepRecord], schedule: &ParameterSchedule, nu: usize) -> Result<String, Error> {
    if nu == 0 || nu > history.len() {
        return Err(Error::Domain(format!("step {nu} out of range")));
    }
    let ws: Vec<IntVec3> = history[..nu].iter().map(|r| r.w.clone()).collect();
    if nu == 1 {
        return Ok(seed_plot(&ws[0]));
    }
    let mut svg = Svg::new(&format!("step {nu}: q = {}", ws[nu - 1].q));
    section_panel(&mut svg, &ws, schedule, nu)?;
    parameter_panel(&mut svg, history, schedule, nu)?;
    Ok(svg.finish())
}

fn seed_plot(w: &IntVec3) -> String {
    let mut svg = Svg::new(&format!("step 1 (seed): w = {w}"));
    svg.text(20.0, 55.0, 12, "integer points of the plane q = 1; w marked at the origin");
    let (cx, cy) = (W / 2.0, H / 2.0 + 20.0);
    svg.line(cx - 3.0 * UNIT, cy, cx + 3.0 * UNIT, cy, AXIS);
    svg.line(cx, cy - 3.0 * UNIT, cx, cy + 3.0 * UNIT, AXIS);
    for i in -SPAN..=SPAN {
        for j in -SPAN..=SPAN {
            svg.dot(cx + i as f64 * UNIT, cy - j as f64 * UNIT, 3.0, GRID_PT);
        }
    }
    svg.dot(cx, cy, 5.0, HIT_PT);
    svg.text(cx + 8.0, cy - 8.0, 12, "w");
    svg.finish()
}

/// The plane partner used by the section certificate.
fn partner(ws: &[IntVec3], nu: usize) -> Result<IntVec3, Error> {
    let (g1, g3) = (&ws[nu - 2], &ws[nu - 1]);
    if nu >= 3 && is_unimodular(g1, &ws[nu - 3], g3) {
        return Ok(ws[nu - 3].clone());
    }
    let mut c = complete_basis(g3, g1).ok_or_else(|| Error::Degenerate("no basis completion".into()))?;
    if c.q.is_negative() {
        let n = ceil(&Rational::new(-c.q.clone(), g1.q.clone()));
        c = c.add(&g1.scale(&n));
    }
    Ok(c)
}

fn section_panel(svg: &mut Svg, ws: &[IntVec3], schedule: &ParameterSchedule, nu: usize) -> Result<(), Error> {
    let g1 = &ws[nu - 2];
    let g3 = &ws[nu - 1];
    let g2 = partner(ws, nu)?;
    let frame = build_frame(g1, &g2, g3)?;
    let q = rat_int(&frame.q);
    let (x2, mu) = map_F_inverse(&q, &frame.d_sq, &rat_int(&g3.q), &frame.f_over_d)?;
    let eps = &schedule.step(nu as u64).ok_or_else(|| Error::Domain("no schedule entry".into()))?.epsilon;
    let t = Rational::one() + eps;
    let e = EllipseSpec::new(q.clone(), x2.clone(), mu.clone(), frame.d_sq.clone(), t.clone())?;

    let (cx, cy) = (200.0, 320.0);
    svg.text(20.0, 55.0, 12, "section of the cylinder, sheared coordinates");
    svg.text(20.0, 72.0, 12, "X = (x - m x2/y2)/q across, row m up");
    svg.line(cx - 2.5 * UNIT, cy, cx + 2.5 * UNIT, cy, AXIS);
    svg.line(cx, cy - 2.5 * UNIT, cx, cy + 2.5 * UNIT, AXIS);
    let (tf, muf) = (to_f64(&t), to_f64(&mu));
    svg.ellipse(cx, cy, UNIT, muf * UNIT, r##"fill="none" stroke="#2c3e50" stroke-dasharray="4 3""##);
    svg.ellipse(cx, cy, tf * UNIT, tf * muf * UNIT, r##"fill="none" stroke="#2c3e50" stroke-width="1.5""##);

    let half_width = rat(5, 2);
    for m in -SPAN..=SPAN {
        let mr = rat(m, 1);
        let shift = &mr * &x2 / &mu;
        let base = &mr * rat_int(&frame.a0);
        let lo = ceil(&((&shift - &half_width * &q - &base) / &q));
        let hi = floor(&((&shift + &half_width * &q - &base) / &q));
        let mut l = lo;
        while l <= hi {
            let x = rat_int(&l) * &q + &base;
            let xs = to_f64(&((&x - &shift) / &q));
            let style = if ellipse_contains(&e, &x, &mr) { HIT_PT } else { GRID_PT };
            svg.dot(cx + xs * UNIT, cy - m as f64 * UNIT, 4.0, style);
            l += 1;
        }
    }
    svg.text(cx + 6.0, cy + 16.0, 11, "0, w_nu");
    svg.text(cx + UNIT + 6.0, cy + 16.0, 11, "w_nu-1");
    svg.text(cx - UNIT - 50.0, cy + 32.0, 11, "w_nu - w_nu-1");
    svg.dot(cx, cy - muf * UNIT, 3.0, r##"fill="#2980b9""##);
    svg.text(cx + 6.0, cy - muf * UNIT - 6.0, 11, "(x2, y2)");
    svg.text(20.0, 560.0, 11, &format!("y2 = V/pi = {muf:.3}, dilation 1 + eps = {tf:.6}"));
    svg.text(20.0, 576.0, 11, "solid: dilated, dashed: undilated, red: inside");
    Ok(())
}

fn parameter_panel(
    svg: &mut Svg,
    history: &[StepRecord],
    schedule: &ParameterSchedule,
    nu: usize,
) -> Result<(), Error> {
    let state = ConstructionState { history: history[..nu - 1].to_vec() };
    let frame = state.frame()?;
    let p = schedule.step(nu as u64).ok_or_else(|| Error::Domain("no schedule entry".into()))?;
    let w = &history[nu - 1].w;
    let k = to_f64(&rat_int(&p.k));
    let lam = to_f64(&frame.volume_ratio());
    let ratio = to_f64(&Rational::new(w.q.clone(), frame.q.clone()));
    let v_over_q = to_f64(&(frame.y_over_d(w) * frame.volume_ratio()));
    let (bx, by) = (ratio / (k * k), v_over_q / k);
    let (b_lo, b_hi) = (to_f64(&p.b_minus), to_f64(&p.b_plus));
    let (alpha, omega) = (to_f64(&p.alpha), to_f64(&p.omega));

    // data box [0, x_max] × [0, y_max] mapped to [440, 780] × [520, 100]
    let x_max = 1.1 * b_hi;
    let y_max = (x_max * lam * omega).sqrt();
    let (px0, px1, py0, py1) = (440.0, 780.0, 520.0, 100.0);
    let sx = |x: f64| px0 + (px1 - px0) * x / x_max;
    let sy = |y: f64| py0 + (py1 - py0) * y / y_max;
    svg.text(440.0, 55.0, 12, "candidate plane: X = ratio/k^2, Y = (v/q)/k");
    svg.line(px0, py0, px1, py0, AXIS);
    svg.line(px0, py0, px0, py1, AXIS);
    for b in [b_lo, b_hi] {
        svg.line(sx(b), py0, sx(b), py1, r##"stroke="#27ae60" stroke-dasharray="5 3""##);
    }
    for (mu, colour) in [(alpha, "#8e44ad"), (omega, "#d35400")] {
        // μ fixed: X = (Y² + 1/k²)/(λ₋μ)
        let pts: Vec<(f64, f64)> = (0..=100)
            .map(|i| y_max * i as f64 / 100.0)
            .map(|y| ((y * y + 1.0 / (k * k)) / (lam * mu), y))
            .filter(|(x, _)| *x <= x_max)
            .map(|(x, y)| (sx(x), sy(y)))
            .collect();
        svg.polyline(&pts, &format!(r#"stroke="{colour}" stroke-width="1.5""#));
    }
    svg.dot(sx(bx), sy(by), 5.0, HIT_PT);
    svg.text(sx(bx) + 8.0, sy(by) - 8.0, 11, "w_nu");
    svg.text(440.0, 544.0, 11, &format!("k = {}, B- = {b_lo:.3}, B+ = {b_hi:.3}", p.k));
    svg.text(440.0, 560.0, 11, &format!("alpha = {alpha:.6}, omega = {omega:.6}"));
    svg.text(440.0, 576.0, 11, &format!("candidate at X = {bx:.3}, Y = {by:.3}"));
    Ok(())
}
