//! Maximum likelihood for right-censored samples.
//!
//! Events contribute `ln f(t)` and censored times `ln S(t)`. Fits run in
//! log-parameter space (Nelder–Mead, then BFGS); observed information,
//! covariance and Wald intervals are reported on the original scale, with the
//! intervals built on the log scale.

use nalgebra::DMatrix;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::distribution::{log1m_exp, KumIwParams, SubModel};
use crate::error::{Error, Result};
use crate::optim::{bfgs, central_gradient, central_hessian, nelder_mead, newton_polish};
use crate::specfun::regularized_upper_gamma;
use crate::survdata::{simulate_censored, CensoredDataset, Status};

/// Censored log-likelihood
/// `r ln(βbc^β) - Σ_F z - (β+1) Σ_F ln t + (b-1) Σ_F ln(1-e^(-z)) + b Σ_C ln(1-e^(-z))`
/// with `z = (c/t)^β`, `F` the events and `C` the censored times. Summed per
/// observation with compensation so finite differences of it stay smooth.
/// `-∞` when a term is, never NaN.
pub fn censored_loglik(p: &KumIwParams, d: &CensoredDataset) -> f64 {
    let (b, c, beta) = (p.b(), p.c(), p.beta());
    let ln_const = (beta * b).ln() + beta * c.ln();
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for o in d.observations() {
        let t = o.time();
        let z = p.z(t);
        let tail = log1m_exp(z);
        let term = match o.status() {
            Status::Event => {
                let mut v = ln_const - z - (beta + 1.0) * t.ln();
                if b != 1.0 {
                    v += (b - 1.0) * tail;
                }
                v
            }
            Status::Censored => b * tail,
        };
        let next = sum + term;
        carry += if sum.abs() >= term.abs() { (sum - next) + term } else { (term - next) + sum };
        sum = next;
    }
    let ll = sum + carry;
    if ll.is_nan() {
        f64::NEG_INFINITY
    } else {
        ll
    }
}

/// Controls for [`fit_mle`] and [`fit_submodel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    /// Convergence threshold on the sup-norm of the log-scale gradient.
    pub gtol: f64,
    pub max_iter: usize,
    /// Confidence level of the Wald intervals stored in the fit.
    pub level: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            gtol: 1e-6,
            max_iter: 2000,
            level: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: SubModel,
    pub estimates: KumIwParams,
    pub loglik: f64,
    /// Negative Hessian of the log-likelihood over the free parameters, original scale.
    pub observed_info: DMatrix<f64>,
    /// Inverse of `observed_info`; `None` if it is not positive definite.
    pub covariance: Option<DMatrix<f64>>,
    /// Wald intervals at `level`, one per free parameter.
    pub ci: Option<Vec<(f64, f64)>>,
    pub level: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Sup-norm of the log-scale gradient at the estimate.
    pub grad_norm: f64,
}

impl FitResult {
    pub fn free_names(&self) -> Vec<&'static str> {
        self.model.free_names()
    }

    pub fn free_estimates(&self) -> Vec<f64> {
        self.model.free_values(&self.estimates)
    }

    /// Standard errors on the original scale.
    pub fn std_errors(&self) -> Option<Vec<f64>> {
        let cov = self.covariance.as_ref()?;
        Some((0..cov.nrows()).map(|i| cov[(i, i)].max(0.0).sqrt()).collect())
    }

    /// AIC `2k - 2ℓ`.
    pub fn aic(&self) -> f64 {
        2.0 * self.model.n_free() as f64 - 2.0 * self.loglik
    }

    fn diagnostics(&self) -> String {
        format!(
            "{} at {} with loglik {:.6}, gradient {:.3e} after {} iterations",
            self.model, self.estimates, self.loglik, self.grad_norm, self.iterations
        )
    }
}

/// Start values: `β` from an inverse-Weibull probability plot of the event
/// times, `c` from their geometric mean, `b = 1`.
pub fn default_init(d: &CensoredDataset) -> Result<KumIwParams> {
    let mut t: Vec<f64> = d.event_times().collect();
    if t.is_empty() {
        return Err(Error::data(None, "no events to initialize from"));
    }
    t.sort_by(f64::total_cmp);
    let m = t.len() as f64;
    let c0 = (t.iter().map(|v| v.ln()).sum::<f64>() / m).exp();
    let (xs, ys): (Vec<f64>, Vec<f64>) = t
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let f_hat = (i as f64 + 0.7) / (m + 0.4);
            (v.ln(), (-f_hat.ln()).ln())
        })
        .unzip();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let beta0 = if slope.is_finite() && slope < 0.0 { (-slope).clamp(0.05, 50.0) } else { 1.0 };
    KumIwParams::new(1.0, c0, beta0)
}

fn project(model: SubModel, p: &KumIwParams) -> Result<KumIwParams> {
    let (pb, pbeta) = model.pinned();
    KumIwParams::new(pb.unwrap_or(p.b()), p.c(), pbeta.unwrap_or(p.beta()))
}

/// Observed information over the free parameters of `model` at `p`.
pub fn observed_information_for(model: SubModel, p: &KumIwParams, d: &CensoredDataset) -> DMatrix<f64> {
    let ll = |theta: &[f64]| match model.build(theta) {
        Ok(q) => censored_loglik(&q, d),
        Err(_) => f64::NAN,
    };
    let h = central_hessian(&ll, &model.free_values(p));
    let j = -h;
    (&j + j.transpose()) * 0.5
}

/// `J(θ) = -∂²ℓ/∂θ∂θᵀ` for the full three-parameter model.
pub fn observed_information(p: &KumIwParams, d: &CensoredDataset) -> DMatrix<f64> {
    observed_information_for(SubModel::KumIw, p, d)
}

/// `J⁻¹` when `J` is symmetric positive definite.
pub fn covariance_from_information(j: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if j.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let eig = j.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return None;
    }
    let inv = j.clone().try_inverse()?;
    Some((&inv + inv.transpose()) * 0.5)
}

/// Two-sided standard normal quantile for confidence `level`.
pub fn normal_critical_value(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!("confidence level must lie in (0, 1), got {level}")));
    }
    let std = Normal::standard();
    Ok(std.inverse_cdf(0.5 + 0.5 * level))
}

fn wald_from(values: &[f64], cov: &DMatrix<f64>, level: f64) -> Result<Vec<(f64, f64)>> {
    let z = normal_critical_value(level)?;
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let var = cov[(i, i)];
            if !(var >= 0.0) {
                return Err(Error::SingularMatrix(format!("negative variance {var} for parameter {i}")));
            }
            let se_log = var.sqrt() / v;
            Ok((v * (-z * se_log).exp(), v * (z * se_log).exp()))
        })
        .collect()
}

/// Intervals `exp(ln θ̂ ± z·se(ln θ̂))` with `se(ln θ̂) = se(θ̂)/θ̂`.
pub fn wald_ci(fit: &FitResult, level: f64) -> Result<Vec<(f64, f64)>> {
    let cov = fit
        .covariance
        .as_ref()
        .ok_or_else(|| Error::SingularMatrix("observed information is not positive definite".into()))?;
    wald_from(&fit.free_estimates(), cov, level)
}

/// Maximum likelihood within `model`. `init` is projected onto the sub-model.
pub fn fit_submodel(
    d: &CensoredDataset,
    model: SubModel,
    init: Option<&KumIwParams>,
    opts: &MleOptions,
) -> Result<FitResult> {
    let n_free = model.n_free();
    if d.n_events() < n_free {
        return Err(Error::data(
            None,
            format!("{} needs at least {n_free} events, dataset has {}", model, d.n_events()),
        ));
    }
    let start = match init {
        Some(p) => project(model, p)?,
        None => project(model, &default_init(d)?)?,
    };
    let objective = |eta: &[f64]| {
        let theta: Vec<f64> = eta.iter().map(|v| v.exp()).collect();
        match model.build(&theta) {
            Ok(q) => -censored_loglik(&q, d),
            Err(_) => f64::INFINITY,
        }
    };
    let eta0: Vec<f64> = model.free_values(&start).iter().map(|v| v.ln()).collect();
    let simplex = nelder_mead(&objective, &eta0, 0.3, 1e-10, opts.max_iter);
    let mut best = bfgs(&objective, &simplex.x, opts.gtol, opts.max_iter);
    let mut iterations = simplex.iterations + best.iterations;
    if !best.converged && best.value.is_finite() {
        let polished = newton_polish(&objective, &best.x, opts.gtol, 50);
        iterations += polished.iterations;
        if polished.grad_norm < best.grad_norm {
            best = polished;
        }
    }
    if !best.converged && best.value.is_finite() {
        let retry = bfgs(&objective, &best.x, opts.gtol, opts.max_iter);
        iterations += retry.iterations;
        if retry.value <= best.value {
            best = retry;
        }
    }
    let theta: Vec<f64> = best.x.iter().map(|v| v.exp()).collect();
    let estimates = model.build(&theta)?;
    let loglik = censored_loglik(&estimates, d);
    let grad_norm = central_gradient(&objective, &best.x)
        .iter()
        .fold(0.0f64, |m, g| m.max(g.abs()));
    let converged = best.converged && loglik.is_finite();
    let observed_info = observed_information_for(model, &estimates, d);
    let covariance = covariance_from_information(&observed_info);
    let ci = match &covariance {
        Some(cov) => wald_from(&theta, cov, opts.level).ok(),
        None => None,
    };
    Ok(FitResult {
        model,
        estimates,
        loglik,
        observed_info,
        covariance,
        ci,
        level: opts.level,
        converged,
        iterations,
        grad_norm,
    })
}

/// Maximum likelihood for the full three-parameter model.
pub fn fit_mle(d: &CensoredDataset, init: Option<&KumIwParams>, opts: &MleOptions) -> Result<FitResult> {
    fit_submodel(d, SubModel::KumIw, init, opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrTestResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub null_model: SubModel,
    pub full_loglik: f64,
    pub null_loglik: f64,
}

impl LrTestResult {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// `2[ℓ(full) - ℓ(restricted)]` against a chi-square with as many degrees of
/// freedom as pinned parameters. The full model is fitted from both the
/// default start and the restricted estimate; the better fit is kept.
pub fn lr_test(d: &CensoredDataset, null: SubModel, opts: &MleOptions) -> Result<LrTestResult> {
    let restricted = fit_submodel(d, null, None, opts)?;
    if null == SubModel::KumIw {
        return Ok(LrTestResult {
            statistic: 0.0,
            df: 0,
            p_value: 1.0,
            null_model: null,
            full_loglik: restricted.loglik,
            null_loglik: restricted.loglik,
        });
    }
    let from_default = fit_mle(d, None, opts)?;
    let from_null = fit_mle(d, Some(&restricted.estimates), opts)?;
    let full = [from_default, from_null]
        .into_iter()
        .max_by(|a, b| (a.converged, a.loglik).partial_cmp(&(b.converged, b.loglik)).unwrap_or(std::cmp::Ordering::Equal))
        .expect("two candidates");
    if !full.converged || !restricted.converged {
        return Err(Error::FitNonConvergence {
            full: full.diagnostics(),
            restricted: restricted.diagnostics(),
        });
    }
    let statistic = (2.0 * (full.loglik - restricted.loglik)).max(0.0);
    let df = null.n_pinned();
    let p_value = regularized_upper_gamma(df as f64 / 2.0, statistic / 2.0)?;
    Ok(LrTestResult {
        statistic,
        df,
        p_value,
        null_model: null,
        full_loglik: full.loglik,
        null_loglik: restricted.loglik,
    })
}

/// One replicate of a simulation study.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub seed: u64,
    /// `None` when the fit itself failed.
    pub fit: Option<FitResult>,
    pub loglik_truth: f64,
}

/// Aggregate recovery statistics over converged replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct StudySummary {
    pub replicates: usize,
    pub converged: usize,
    /// Median of `|θ̂ - θ| / θ` per parameter `(b, c, β)`.
    pub median_abs_rel_error: [f64; 3],
    /// Fraction of converged fits whose Wald interval covers the truth.
    pub coverage: [f64; 3],
}

/// Fits `replicates` censored samples drawn from `truth`, in parallel.
/// Replicate `i` uses seed `base_seed + i`.
pub fn simulation_study(
    truth: &KumIwParams,
    n: usize,
    censor_rate: f64,
    replicates: usize,
    base_seed: u64,
    opts: &MleOptions,
) -> Result<Vec<ReplicateOutcome>> {
    (0..replicates as u64)
        .into_par_iter()
        .map(|i| {
            let seed = base_seed.wrapping_add(i);
            let d = simulate_censored(truth, n, censor_rate, seed)?;
            Ok(ReplicateOutcome {
                seed,
                loglik_truth: censored_loglik(truth, &d),
                fit: fit_mle(&d, None, opts).ok(),
            })
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

pub fn summarize_study(truth: &KumIwParams, outcomes: &[ReplicateOutcome]) -> StudySummary {
    let fits: Vec<&FitResult> = outcomes
        .iter()
        .filter_map(|o| o.fit.as_ref())
        .filter(|f| f.converged)
        .collect();
    let t = truth.to_array();
    let mut mare = [0.0; 3];
    let mut coverage = [0.0; 3];
    for i in 0..3 {
        mare[i] = median(fits.iter().map(|f| (f.estimates.to_array()[i] - t[i]).abs() / t[i]).collect());
        let covered = fits
            .iter()
            .filter(|f| f.ci.as_ref().is_some_and(|ci| ci[i].0 <= t[i] && t[i] <= ci[i].1))
            .count();
        coverage[i] = if fits.is_empty() { f64::NAN } else { covered as f64 / fits.len() as f64 };
    }
    StudySummary {
        replicates: outcomes.len(),
        converged: fits.len(),
        median_abs_rel_error: mare,
        coverage,
    }
}
