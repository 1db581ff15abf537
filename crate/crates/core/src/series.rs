//! Series evaluation of the binomial–exponential integrals behind the
//! moments, mean deviations, inequality curves and entropies.
//!
//! Every such quantity reduces, after the substitution `x = (c/t)^β`, to
//!
//! ```text
//! K(lo, hi) = ∫_lo^hi x^(s-1) e^(-λx) (1 - e^(-x))^ν dx
//! ```
//!
//! Expanding `(1 - e^(-x))^ν = Σ_r w_r e^(-r x)` and integrating termwise gives
//!
//! ```text
//! K(lo, hi) = Σ_r w_r (λ+r)^(-s) [Γ(s, (λ+r) lo) - Γ(s, (λ+r) hi)]
//! ```
//!
//! For `lo` bounded away from zero the terms fall off like `e^(-r lo)`. Near
//! zero the weights only decay algebraically (`|w_r| ~ r^(-ν-1)`), which makes
//! the plain sum useless when ν < 0. The range below [`SPLIT`] is therefore
//! integrated from the Taylor expansion of the analytic factor
//! `h(x) = e^(-λx) ((1 - e^(-x))/x)^ν`, whose radius of convergence is 2π.
//! When ν is a nonnegative integer the weight sum terminates and is used
//! directly.

use crate::error::{Error, Result};
use crate::specfun::{ln_gamma_unchecked, upper_incomplete_gamma, upper_incomplete_gamma_tail, BinomialWeights};

/// Boundary between the power-series and weight-series ranges.
pub const SPLIT: f64 = 1.0;

/// Truncation policy for partial sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    /// A partial sum stops once the latest term is below `tol · |sum|`.
    pub tol: f64,
    pub max_terms: usize,
}

impl SeriesConfig {
    pub fn new(tol: f64, max_terms: usize) -> Result<Self> {
        if !(tol > 0.0) || max_terms == 0 {
            return Err(Error::domain(format!(
                "series config requires tol > 0 and max_terms >= 1 (got {tol}, {max_terms})"
            )));
        }
        Ok(Self { tol, max_terms })
    }
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_terms: 10_000,
        }
    }
}

/// `x ↦ x^(s-1) e^(-λx) (1 - e^(-x))^ν` on `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialExpKernel {
    pub s: f64,
    pub lambda: f64,
    pub nu: f64,
}

impl BinomialExpKernel {
    pub fn new(s: f64, lambda: f64, nu: f64) -> Result<Self> {
        if !(lambda > 0.0) || !s.is_finite() || !nu.is_finite() {
            return Err(Error::domain(format!(
                "kernel requires finite s, nu and lambda > 0 (got s = {s}, lambda = {lambda}, nu = {nu})"
            )));
        }
        Ok(Self { s, lambda, nu })
    }

    /// The integrand itself, for quadrature cross-checks.
    pub fn eval(&self, x: f64) -> f64 {
        ((self.s - 1.0) * x.ln() - self.lambda * x + self.nu * crate::distribution::log1m_exp(x)).exp()
    }

    /// Whether the integral from 0 converges.
    pub fn integrable_at_zero(&self) -> bool {
        self.s + self.nu > 0.0
    }

    fn terminating(&self) -> Option<usize> {
        BinomialWeights::for_exponent(self.nu).terminates_after()
    }

    /// `∫_lo^hi` of the kernel, `0 ≤ lo ≤ hi ≤ ∞`.
    pub fn integral(&self, lo: f64, hi: f64, cfg: &SeriesConfig) -> Result<f64> {
        if !(lo >= 0.0) || !(hi >= lo) {
            return Err(Error::domain(format!("invalid kernel range [{lo}, {hi}]")));
        }
        if lo == hi {
            return Ok(0.0);
        }
        if lo == 0.0 && !self.integrable_at_zero() {
            return Err(Error::domain(format!(
                "kernel integral diverges at 0 (s + nu = {} <= 0)",
                self.s + self.nu
            )));
        }
        if let Some(n_terms) = self.terminating() {
            if self.s > 0.0 && n_terms <= 32 {
                return self.weight_series(lo, hi, Some(n_terms), cfg);
            }
        }
        let mut total = 0.0;
        if lo < SPLIT {
            total += self.power_series(lo, hi.min(SPLIT), cfg)?;
        }
        if hi > SPLIT {
            total += self.weight_series(lo.max(SPLIT), hi, self.terminating(), cfg)?;
        }
        Ok(total)
    }

    /// `∫_0^∞` of the kernel.
    pub fn complete(&self, cfg: &SeriesConfig) -> Result<f64> {
        self.integral(0.0, f64::INFINITY, cfg)
    }

    /// `(λ+r)^(-s) Γ(s, (λ+r) x)`, with `Γ(s, 0) = Γ(s)` for `s > 0`.
    fn scaled_upper_gamma(&self, rate: f64, x: f64) -> Result<f64> {
        let z = rate * x;
        if z.is_infinite() {
            return Ok(0.0);
        }
        let g = if self.s > 0.0 {
            upper_incomplete_gamma(self.s, z)?
        } else {
            upper_incomplete_gamma_tail(self.s, z)?
        };
        Ok(g * rate.powf(-self.s))
    }

    /// Termwise sum `Σ_r w_r (λ+r)^(-s) [Γ(s,(λ+r)lo) - Γ(s,(λ+r)hi)]`.
    fn weight_series(&self, lo: f64, hi: f64, n_terms: Option<usize>, cfg: &SeriesConfig) -> Result<f64> {
        let limit = n_terms.unwrap_or(cfg.max_terms);
        let mut sum = 0.0;
        let mut small_run = 0;
        for (r, w) in BinomialWeights::for_exponent(self.nu).take(limit).enumerate() {
            if w == 0.0 {
                continue;
            }
            let rate = self.lambda + r as f64;
            let term = w * (self.scaled_upper_gamma(rate, lo)? - self.scaled_upper_gamma(rate, hi)?);
            sum += term;
            if n_terms.is_none() {
                if term.abs() <= cfg.tol * sum.abs() {
                    small_run += 1;
                    if small_run >= 3 {
                        return Ok(sum);
                    }
                } else {
                    small_run = 0;
                }
            }
        }
        if n_terms.is_some() {
            Ok(sum)
        } else {
            Err(Error::SeriesNonConvergence {
                terms: limit,
                partial_sum: sum,
            })
        }
    }

    /// `∫_lo^hi x^(s+ν-1) h(x) dx` from the Taylor coefficients of `h`; `hi ≤ SPLIT`.
    fn power_series(&self, lo: f64, hi: f64, cfg: &SeriesConfig) -> Result<f64> {
        debug_assert!(hi <= SPLIT);
        let base = self.s + self.nu;
        let ln_lo = lo.ln();
        let ln_hi = hi.ln();
        let max_j = cfg.max_terms.min(400);

        // g(x) = (1 - e^-x)/x, p = g^ν (Miller's recurrence), e = e^(-λx), h = p·e.
        let mut g: Vec<f64> = Vec::with_capacity(64);
        let mut p: Vec<f64> = Vec::with_capacity(64);
        let mut e: Vec<f64> = Vec::with_capacity(64);
        let mut fact = 1.0; // (j+1)!
        let mut sum = 0.0;
        let mut small_run = 0;
        for j in 0..max_j {
            fact *= (j + 1) as f64;
            g.push(if j % 2 == 0 { 1.0 } else { -1.0 } / fact);
            if j == 0 {
                p.push(1.0);
                e.push(1.0);
            } else {
                let n = j as f64;
                let pj = (1..=j)
                    .map(|k| ((self.nu + 1.0) * k as f64 - n) * g[k] * p[j - k])
                    .sum::<f64>()
                    / n;
                p.push(pj);
                e.push(e[j - 1] * (-self.lambda) / n);
            }
            let hj: f64 = (0..=j).map(|i| p[i] * e[j - i]).sum();

            let expo = base + j as f64;
            let piece = if expo == 0.0 {
                ln_hi - ln_lo
            } else if lo == 0.0 {
                (expo * ln_hi).exp() / expo
            } else {
                ((expo * ln_hi).exp() - (expo * ln_lo).exp()) / expo
            };
            let term = hj * piece;
            sum += term;
            if term.abs() <= cfg.tol * sum.abs() {
                small_run += 1;
                if small_run >= 3 {
                    return Ok(sum);
                }
            } else {
                small_run = 0;
            }
        }
        Err(Error::SeriesNonConvergence {
            terms: max_j,
            partial_sum: sum,
        })
    }
}

/// `Γ(s)` for `s > 0`, used by the termwise closed forms.
pub(crate) fn gamma_fn(s: f64) -> f64 {
    ln_gamma_unchecked(s).exp()
}
