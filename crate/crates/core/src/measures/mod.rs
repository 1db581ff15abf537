//! Moments, generating functions, mean deviations, Bonferroni and Lorenz
//! curves, order statistics and entropies.
//!
//! Quantities with a usable series representation are evaluated through
//! [`crate::series`]. Entropies and order-statistic moments are computed by
//! quadrature of their defining integrals; their series forms are available
//! as cross-checks only.

mod entropy;
mod inequality;
mod moments;
mod order;

pub use entropy::{renyi_entropy, renyi_entropy_series, shannon_entropy, shannon_entropy_series};
pub use inequality::{
    bonferroni, inequality_curves, lorenz, mean_deviation_about_mean, mean_deviation_about_median,
    partial_first_moment, upper_first_moment, InequalityPoint,
};
pub use moments::{
    cumulant_generating_function, expanded_pdf, mean, mgf_truncated, moment, moment_series_direct,
    MgfTruncation, MomentSpec,
};
pub use order::{order_stat_moment, order_stat_moment_series, order_stat_pdf};

pub use crate::series::SeriesConfig;

use crate::distribution::{log1m_exp, KumIwParams};
use crate::error::Result;
use crate::quad::{integrate_half_line, QuadOptions};

/// `∫_0^∞ g(x) dx` in the variable `x = (c/t)^β`.
pub(crate) fn integrate_x_space<G: Fn(f64) -> f64>(g: G) -> Result<f64> {
    integrate_half_line(g, 0.0, 1.0, &QuadOptions::default()).map(|r| r.value)
}

/// `ln f(t)` expressed through `x = (c/t)^β`:
/// `ln(βb/c) + (1 + 1/β) ln x - x + (b-1) ln(1 - e^(-x))`.
pub(crate) fn ln_pdf_in_x(p: &KumIwParams, x: f64) -> f64 {
    let (b, c, beta) = (p.b(), p.c(), p.beta());
    let mut v = (beta * b / c).ln() + (1.0 + 1.0 / beta) * x.ln() - x;
    if b != 1.0 {
        v += (b - 1.0) * log1m_exp(x);
    }
    v
}

/// Density of `X = (c/T)^β`: `b e^(-x) (1 - e^(-x))^(b-1)`.
pub(crate) fn ln_x_density(b: f64, x: f64) -> f64 {
    let mut v = b.ln() - x;
    if b != 1.0 {
        v += (b - 1.0) * log1m_exp(x);
    }
    v
}
