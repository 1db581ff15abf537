use super::{integrate_x_space, ln_pdf_in_x, ln_x_density};
use crate::distribution::KumIwParams;
use crate::error::{Error, Result};
use crate::series::{BinomialExpKernel, SeriesConfig};
use crate::specfun::{digamma, EULER_MASCHERONI};

/// Differential entropy `-E[ln f(T)]` in nats, by quadrature in `x = (c/t)^β`.
pub fn shannon_entropy(p: &KumIwParams) -> Result<f64> {
    let b = p.b();
    integrate_x_space(|x| {
        let w = ln_x_density(b, x).exp();
        if w == 0.0 {
            0.0
        } else {
            -w * ln_pdf_in_x(p, x)
        }
    })
}

/// Closed form `-ln(βb/c) - (1 + 1/β) E[ln X] + ψ(b+1) + γ + (b-1)/b`, where
/// `E[ln X]` is `b ∂K/∂s` at `s = 1` taken by finite differences.
pub fn shannon_entropy_series(p: &KumIwParams, cfg: &SeriesConfig) -> Result<f64> {
    let (b, c, beta) = (p.b(), p.c(), p.beta());
    let h = 1e-3;
    let k = |s: f64| BinomialExpKernel::new(s, 1.0, b - 1.0)?.complete(cfg);
    let dk = (k(1.0 - 2.0 * h)? - 8.0 * k(1.0 - h)? + 8.0 * k(1.0 + h)? - k(1.0 + 2.0 * h)?) / (12.0 * h);
    let mean_ln_x = b * dk;
    Ok(-(beta * b / c).ln() - (1.0 + 1.0 / beta) * mean_ln_x + digamma(b + 1.0)? + EULER_MASCHERONI + (b - 1.0) / b)
}

fn check_order(p: &KumIwParams, rho: f64) -> Result<()> {
    if !(rho > 0.0) || rho == 1.0 || !rho.is_finite() {
        return Err(Error::domain(format!("Renyi order must be positive and different from 1, got {rho}")));
    }
    let inv_beta = 1.0 / p.beta();
    if rho * (p.b() + inv_beta) <= inv_beta {
        return Err(Error::domain(format!(
            "Renyi entropy of order {rho} is infinite for b = {}, beta = {}",
            p.b(),
            p.beta()
        )));
    }
    Ok(())
}

/// `ln(∫ f^ρ dt) / (1 - ρ)` by quadrature; finite iff `ρ(b + 1/β) > 1/β`.
pub fn renyi_entropy(p: &KumIwParams, rho: f64) -> Result<f64> {
    check_order(p, rho)?;
    let jac = (p.c() / p.beta()).ln();
    let tail = 1.0 / p.beta() + 1.0;
    let integral = integrate_x_space(|x| (rho * ln_pdf_in_x(p, x) + jac - tail * x.ln()).exp())?;
    Ok(integral.ln() / (1.0 - rho))
}

/// `ln(β^(ρ-1) b^ρ c^(1-ρ) K(ρ + ρ/β - 1/β, ρ, ρ(b-1))) / (1 - ρ)`.
pub fn renyi_entropy_series(p: &KumIwParams, rho: f64, cfg: &SeriesConfig) -> Result<f64> {
    check_order(p, rho)?;
    let (b, c, beta) = (p.b(), p.c(), p.beta());
    let s = rho + (rho - 1.0) / beta;
    let k = BinomialExpKernel::new(s, rho, rho * (b - 1.0))?.complete(cfg)?;
    let ln_int = (rho - 1.0) * beta.ln() + rho * b.ln() + (1.0 - rho) * c.ln() + k.ln();
    Ok(ln_int / (1.0 - rho))
}
