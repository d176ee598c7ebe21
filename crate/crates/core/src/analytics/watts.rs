//! The last-visited-side law in the equilateral triangle and the
//! Schwarz–Christoffel map of the upper half-plane onto it.

use std::f64::consts::PI;
use std::fmt::Write as _;

use super::quadrature::Quadrature;
use super::special::{beta, gamma, hyp2f1, reg_inc_beta};
use crate::error::domain;
use crate::Result;

const TWO_THIRDS: f64 = 2.0 / 3.0;
const ONE_THIRD: f64 = 1.0 / 3.0;

fn quad() -> Quadrature {
    Quadrature::with_tolerance(1e-14).with_relative(1e-14)
}

/// `I_s(2/3, 2/3)`.
pub fn watts_closed(s: f64) -> Result<f64> {
    reg_inc_beta(TWO_THIRDS, TWO_THIRDS, s, &quad())
}

/// `π√3 / (3Γ(2/3)³) · (a(1−a))^{2/3} · ₂F₁(1, 4/3; 5/3; a)`.
pub fn watts_via_hypergeometric(a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(domain(format!("a = {a} must lie in (0, 1)")));
    }
    // ₂F₁ blows up at z = 1; reflect
    if a > 0.95 {
        return Ok(1.0 - watts_via_hypergeometric(1.0 - a)?);
    }
    let prefactor = PI * 3f64.sqrt() / (3.0 * gamma(TWO_THIRDS).powi(3));
    let f = hyp2f1(1.0, 4.0 / 3.0, 5.0 / 3.0, a, &quad())?;
    Ok(prefactor * (a * (1.0 - a)).powf(TWO_THIRDS) * f)
}

/// `F(a) = ∫_0^a u^{−2/3}(1−u)^{−2/3} du / B(1/3, 1/3)`: the image of the
/// real segment `[0, 1]` on the triangle side of unit length.
pub fn sc_map(a: f64) -> Result<f64> {
    reg_inc_beta(ONE_THIRD, ONE_THIRD, a, &quad())
}

pub fn sc_deriv(a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(domain(format!("a = {a} must lie in (0, 1)")));
    }
    Ok((a * (1.0 - a)).powf(-TWO_THIRDS) / beta(ONE_THIRD, ONE_THIRD))
}

/// Inverse of [`sc_map`] by bisection.
pub fn sc_inverse(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(domain(format!("x = {x} must lie in [0, 1]")));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(x);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if sc_map(mid)? < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `F′(a)^{−1} · √3/(2π B(1/3, 1/3)) · ∫_1^∞ du / ((u(u−1))^{2/3} (u − a))`:
/// the conditional probability that the excursion from the exit point `a`
/// first hits the boundary on the right-hand side, averaged against the
/// Cauchy exit law.
pub fn watts_via_integral(a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(domain(format!("a = {a} must lie in (0, 1)")));
    }
    let q = quad().with_relative(1e-13);
    // near u = 1: u − 1 = v³
    let near = q.integrate(
        |v| {
            let d = v * v * v;
            3.0 * (1.0 + d).powf(-TWO_THIRDS) / (d + (1.0 - a))
        },
        0.0,
        1.0,
    )?;
    // [2, ∞): u = 1/w, then w = z³
    let far = q.integrate(
        |z| {
            let w = z * z * z;
            3.0 * w * (1.0 - w).powf(-TWO_THIRDS) / (1.0 - a * w)
        },
        0.0,
        0.5f64.powf(ONE_THIRD),
    )?;
    let constant = 3f64.sqrt() / (2.0 * PI * beta(ONE_THIRD, ONE_THIRD));
    Ok(constant * (near.value + far.value) / sc_deriv(a)?)
}

/// The last-side curve as a function of the exit position `x` on the far
/// side when the law is `I_a` at `a = F⁻¹(x)`.
pub fn watts_composed(x: f64) -> Result<f64> {
    watts_closed(sc_inverse(x)?)
}

/// `s,watts_closed,watts_composed` on `grid + 2` equispaced points of `[0, 1]`.
pub fn curves_csv(grid: usize) -> Result<String> {
    let mut out = String::from("s,watts_closed,watts_composed\n");
    for i in 0..=grid + 1 {
        let s = i as f64 / (grid + 1) as f64;
        let _ = writeln!(out, "{s},{:.15},{:.15}", watts_closed(s)?, watts_composed(s)?);
    }
    Ok(out)
}
