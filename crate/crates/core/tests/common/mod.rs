//! Reference computations that share no code with the library.

#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use kumiw::KumIwParams;

/// `∫_0^∞ g(t) dt` by the exp-sinh rule `t = exp(π/2 · sinh u)`, halving the
/// step until two successive trapezoid sums agree to `1e-13` relative.
pub fn integrate_positive_line<G: Fn(f64) -> f64>(g: G) -> f64 {
    let mapped = |u: f64| {
        let t = (FRAC_PI_2 * u.sinh()).exp();
        if t == 0.0 || !t.is_finite() {
            return 0.0;
        }
        let v = g(t) * t * FRAC_PI_2 * u.cosh();
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    trapezoid_refine(mapped, 6.5)
}

/// `∫_a^b g(x) dx` by the tanh-sinh rule; resolves singularities at `a` best.
pub fn integrate_interval<G: Fn(f64) -> f64>(g: G, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mapped = |u: f64| {
        let s = FRAC_PI_2 * u.sinh();
        let ch = s.cosh();
        // 1 + tanh(s) = 2 / (1 + e^(-2s)), kept accurate for s ≪ 0
        let gap = if s < 0.0 {
            let e = (2.0 * s).exp();
            2.0 * e / (1.0 + e)
        } else {
            2.0 / (1.0 + (-2.0 * s).exp())
        };
        let x = a + half * gap;
        let weight = half * FRAC_PI_2 * u.cosh() / (ch * ch);
        if weight == 0.0 || x <= a || x >= b {
            return 0.0;
        }
        let v = g(x) * weight;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    trapezoid_refine(mapped, 6.2)
}

fn trapezoid_refine<F: Fn(f64) -> f64>(f: F, limit: f64) -> f64 {
    let mut h = 0.5;
    let mut sum: f64 = {
        let n = (limit / h) as i64;
        (-n..=n).map(|k| f(k as f64 * h)).sum()
    };
    let mut estimate = sum * h;
    for _ in 0..12 {
        h *= 0.5;
        let n = (limit / h) as i64;
        let odd: f64 = (-n..=n).filter(|k| k % 2 != 0).map(|k| f(k as f64 * h)).sum();
        sum += odd;
        let next = sum * h;
        if (next - estimate).abs() <= 1e-13 * next.abs() {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// `ln Γ(x)` for `x > 0` by upward recurrence to `x ≥ 15` and the Stirling series.
pub fn ln_gamma(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 15.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            + inv2 * (-1.0 / 360.0 + inv2 * (1.0 / 1260.0 + inv2 * (-1.0 / 1680.0 + inv2 * (1.0 / 1188.0)))));
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series
}

/// Density written out directly in `t`.
pub fn pdf(p: &KumIwParams, t: f64) -> f64 {
    let (b, c, beta) = (p.b(), p.c(), p.beta());
    let z = (c / t).powf(beta);
    beta * b * c.powf(beta) * t.powf(-beta - 1.0) * (-z).exp() * (-(-z).exp_m1()).powf(b - 1.0)
}

pub fn cdf(p: &KumIwParams, t: f64) -> f64 {
    let z = (p.c() / t).powf(p.beta());
    1.0 - (-(-z).exp_m1()).powf(p.b())
}

/// `E[T^k]` by quadrature of `t^k f(t)`.
pub fn moment(p: &KumIwParams, k: f64) -> f64 {
    integrate_positive_line(|t| t.powf(k) * pdf(p, t))
}

/// The 36 parameter triples used by the grid checks.
pub fn grid() -> Vec<KumIwParams> {
    let mut out = Vec::new();
    for b in [0.5, 1.0, 2.0, 4.0] {
        for c in [0.5, 1.0, 3.0] {
            for beta in [1.5, 2.5, 4.0] {
                out.push(KumIwParams::new(b, c, beta).unwrap());
            }
        }
    }
    out
}
