//! Airy function of the first kind on the real line.
//!
//! Maclaurin series on `[-7, 2]`. On `(2, 7]` the series cancels badly in
//! relative terms, so the steepest-descent integral is used instead. Poincaré
//! asymptotic expansions cover `|x| > 7`, where the smallest term is below
//! `exp(-24)`.

use std::f64::consts::{FRAC_PI_4, PI};

const AI0: f64 = 0.355_028_053_887_817_24;
const NEG_AI_PRIME0: f64 = 0.258_819_403_792_806_8;
const SERIES_LIMIT: f64 = 7.0;
const QUADRATURE_START: f64 = 2.0;

pub fn airy_ai(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if (-SERIES_LIMIT..=QUADRATURE_START).contains(&x) {
        maclaurin(x)
    } else if (QUADRATURE_START..=SERIES_LIMIT).contains(&x) {
        steepest_descent(x)
    } else if x > 0.0 {
        decaying_asymptotic(x)
    } else {
        oscillating_asymptotic(-x)
    }
}

fn maclaurin(x: f64) -> f64 {
    let x3 = x * x * x;
    let mut f = 1.0;
    let mut g = x;
    let mut tf = 1.0;
    let mut tg = x;
    for k in 1..200 {
        let k3 = 3.0 * k as f64;
        tf *= x3 / ((k3 - 1.0) * k3);
        tg *= x3 / (k3 * (k3 + 1.0));
        f += tf;
        g += tg;
        if tf.abs() < 1e-18 * f.abs().max(1.0) && tg.abs() < 1e-18 * g.abs().max(1.0) {
            break;
        }
    }
    AI0 * f - NEG_AI_PRIME0 * g
}

/// `Ai(x) = exp(-zeta) / pi * integral_0^inf exp(-sqrt(x) s^2) cos(s^3 / 3) ds`,
/// the contour shifted through the saddle at `i sqrt(x)`. The integrand is
/// even and entire, so the trapezoid rule converges geometrically.
fn steepest_descent(x: f64) -> f64 {
    let a = x.sqrt();
    let zeta = 2.0 / 3.0 * x * a;
    let step = 0.05;
    let count = ((45.0 / a).sqrt() / step).ceil() as usize;
    let mut sum = 0.5;
    for k in 1..=count {
        let s = k as f64 * step;
        sum += (-a * s * s).exp() * (s * s * s / 3.0).cos();
    }
    (-zeta).exp() / PI * sum * step
}

/// Coefficients `u_k = (2k+1)(2k+3)...(6k-1) / (216^k k!)`.
fn asymptotic_coefficients(count: usize) -> Vec<f64> {
    let mut u = Vec::with_capacity(count);
    u.push(1.0);
    for k in 1..count {
        let kf = k as f64;
        let ratio = (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(u[k - 1] * ratio);
    }
    u
}

fn decaying_asymptotic(x: f64) -> f64 {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let u = asymptotic_coefficients(40);
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    for (k, uk) in u.iter().enumerate() {
        let term = uk / zeta.powi(k as i32);
        if term > last || term < 1e-17 {
            break;
        }
        sum += if k % 2 == 0 { term } else { -term };
        last = term;
    }
    (-zeta).exp() / (2.0 * PI.sqrt() * x.powf(0.25)) * sum
}

fn oscillating_asymptotic(t: f64) -> f64 {
    let zeta = 2.0 / 3.0 * t.powf(1.5);
    let u = asymptotic_coefficients(60);
    let mut even = 0.0;
    let mut odd = 0.0;
    let mut last = f64::INFINITY;
    for (k, uk) in u.iter().enumerate() {
        let term = uk / zeta.powi(k as i32);
        if term > last || term < 1e-17 {
            break;
        }
        // Terms alternate in sign within each of the two series.
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            even += sign * term;
        } else {
            odd += sign * term;
        }
        last = term;
    }
    let phase = zeta - FRAC_PI_4;
    (phase.cos() * even + phase.sin() * odd) / (PI.sqrt() * t.powf(0.25))
}
