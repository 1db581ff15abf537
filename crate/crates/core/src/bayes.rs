//! Bayesian inference with independent Gamma priors and a
//! Metropolis-within-Gibbs sampler.
//!
//! Each sweep updates `b`, then `c`, then `β` by a Gaussian random walk on
//! the log scale, accepting against that coordinate's full conditional. The
//! `ln θ` Jacobian of the log-scale walk enters the acceptance ratio.

use std::fmt;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::distribution::{log1m_exp, KumIwParams};
use crate::error::{Error, Result};
use crate::mle::{censored_loglik, default_init};
use crate::specfun::ln_gamma_unchecked;
use crate::survdata::{format_float, CensoredDataset, Status};

/// `Gamma(shape, rate)` with density `rate^shape θ^(shape-1) e^(-rate θ) / Γ(shape)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPrior {
    pub shape: f64,
    pub rate: f64,
}

impl GammaPrior {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite() {
            Ok(Self { shape, rate })
        } else {
            Err(Error::domain(format!("gamma prior needs positive shape and rate, got ({shape}, {rate})")))
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        self.shape * self.rate.ln() - ln_gamma_unchecked(self.shape) + (self.shape - 1.0) * x.ln() - self.rate * x
    }

    pub fn cdf(&self, x: f64) -> f64 {
        crate::specfun::regularized_lower_gamma(self.shape, self.rate * x).unwrap_or(f64::NAN)
    }
}

impl Default for GammaPrior {
    fn default() -> Self {
        Self { shape: 1.0, rate: 0.001 }
    }
}

/// Independent priors on `b`, `c` and `β`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PriorSpec {
    pub b: GammaPrior,
    pub c: GammaPrior,
    pub beta: GammaPrior,
}

impl PriorSpec {
    pub fn log_density(&self, p: &KumIwParams) -> f64 {
        self.b.ln_pdf(p.b()) + self.c.ln_pdf(p.c()) + self.beta.ln_pdf(p.beta())
    }

    pub fn get(&self, which: Param) -> &GammaPrior {
        match which {
            Param::B => &self.b,
            Param::C => &self.c,
            Param::Beta => &self.beta,
        }
    }
}

/// Coordinate of the parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    B,
    C,
    Beta,
}

impl Param {
    pub const ALL: [Param; 3] = [Param::B, Param::C, Param::Beta];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Param::B => "b",
            Param::C => "c",
            Param::Beta => "beta",
        }
    }

    pub fn get(self, p: &KumIwParams) -> f64 {
        p.to_array()[self.index()]
    }

    /// `p` with this coordinate replaced.
    pub fn with(self, p: &KumIwParams, value: f64) -> Result<KumIwParams> {
        let mut v = p.to_array();
        v[self.index()] = value;
        KumIwParams::from_array(v)
    }
}

fn finite_or_neg_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Censored log-likelihood plus log prior densities.
pub fn log_posterior(p: &KumIwParams, d: &CensoredDataset, prior: &PriorSpec) -> f64 {
    log_posterior_weighted(p, d, prior, 1.0)
}

/// As [`log_posterior`] with the log-likelihood multiplied by `weight`;
/// `weight = 0` leaves only the prior.
pub fn log_posterior_weighted(p: &KumIwParams, d: &CensoredDataset, prior: &PriorSpec, weight: f64) -> f64 {
    let ll = if weight == 0.0 { 0.0 } else { weight * censored_loglik(p, d) };
    finite_or_neg_inf(ll + prior.log_density(p))
}

/// The unnormalized posterior kernel for fully observed data, written out as
/// `(m+n-1) ln b + (a+nβ-1) ln c + (x+n-1) ln β - wb - sc - lβ
///  - c^β Σ t^(-β) + Σ [-(β+1) ln t + (b-1) ln(1 - e^(-(c/t)^β))]`.
pub fn uncensored_log_kernel(p: &KumIwParams, d: &CensoredDataset, prior: &PriorSpec) -> Result<f64> {
    if d.n_censored() > 0 {
        return Err(Error::domain("the uncensored kernel needs a dataset without censoring"));
    }
    let (b, c, beta) = (p.b(), p.c(), p.beta());
    let n = d.len() as f64;
    let mut v = (prior.b.shape + n - 1.0) * b.ln() + (prior.c.shape + n * beta - 1.0) * c.ln()
        + (prior.beta.shape + n - 1.0) * beta.ln()
        - prior.b.rate * b
        - prior.c.rate * c
        - prior.beta.rate * beta;
    let mut sum_pow = 0.0;
    for t in d.times() {
        sum_pow += t.powf(-beta);
        v += -(beta + 1.0) * t.ln() + (b - 1.0) * log1m_exp(p.z(t));
    }
    Ok(finite_or_neg_inf(v - c.powf(beta) * sum_pow))
}

/// Data sums needed by the conditionals.
#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    events: f64,
    sum_z: f64,
    sum_ln_t: f64,
    event_tail: f64,
    censored_tail: f64,
}

fn sums(p: &KumIwParams, d: &CensoredDataset) -> Sums {
    let mut s = Sums {
        events: 0.0,
        sum_z: 0.0,
        sum_ln_t: 0.0,
        event_tail: 0.0,
        censored_tail: 0.0,
    };
    for o in d.observations() {
        let z = p.z(o.time());
        let tail = log1m_exp(z);
        match o.status() {
            Status::Event => {
                s.events += 1.0;
                s.sum_z += z;
                s.sum_ln_t += o.time().ln();
                s.event_tail += tail;
            }
            Status::Censored => s.censored_tail += tail,
        }
    }
    s
}

/// Log full conditional of one coordinate, up to a constant in that coordinate:
///
/// * `b`: `(m-1+r) ln b - wb + (b-1) Σ_F ln(1-e^(-z)) + b Σ_C ln(1-e^(-z))`
/// * `c`: `(a-1+rβ) ln c - sc - Σ_F z + (b-1) Σ_F ln(1-e^(-z)) + b Σ_C ln(1-e^(-z))`
/// * `β`: `(x-1+r) ln β - lβ + rβ ln c - β Σ_F ln t - Σ_F z + (b-1) Σ_F ln(1-e^(-z)) + b Σ_C ln(1-e^(-z))`
///
/// with `z = (c/t)^β`, `r` the number of events, `F` and `C` the event and
/// censored observations. `current` supplies the other two coordinates.
pub fn full_conditional_log(
    which: Param,
    value: f64,
    current: &KumIwParams,
    d: &CensoredDataset,
    prior: &PriorSpec,
) -> Result<f64> {
    let p = which.with(current, value)?;
    Ok(conditional_weighted(which, &p, d, prior, 1.0))
}

fn conditional_weighted(which: Param, p: &KumIwParams, d: &CensoredDataset, prior: &PriorSpec, weight: f64) -> f64 {
    let s = if weight == 0.0 { Sums::default() } else { sums(p, d) };
    conditional_from_sums(which, p, &s, prior, weight)
}

fn conditional_from_sums(which: Param, p: &KumIwParams, s: &Sums, prior: &PriorSpec, weight: f64) -> f64 {
    let g = prior.get(which);
    let x = which.get(p);
    let log_prior = (g.shape - 1.0) * x.ln() - g.rate * x;
    if weight == 0.0 {
        return finite_or_neg_inf(log_prior);
    }
    let (b, c, beta) = (p.b(), p.c(), p.beta());
    let tails = b * s.censored_tail + if b != 1.0 { (b - 1.0) * s.event_tail } else { 0.0 };
    let ll = match which {
        Param::B => s.events * b.ln() + tails,
        Param::C => s.events * beta * c.ln() - s.sum_z + tails,
        Param::Beta => s.events * beta.ln() + s.events * beta * c.ln() - beta * s.sum_ln_t - s.sum_z + tails,
    };
    finite_or_neg_inf(log_prior + weight * ll)
}

/// Metropolis acceptance probability for a log-scale random-walk move from
/// `ln θ = eta_current` to `eta_proposal`, given the log conditionals at both points.
pub fn acceptance_probability(log_cond_current: f64, log_cond_proposal: f64, eta_current: f64, eta_proposal: f64) -> f64 {
    let log_ratio = (log_cond_proposal - log_cond_current) + (eta_proposal - eta_current);
    if log_ratio.is_nan() {
        0.0
    } else {
        log_ratio.min(0.0).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McmcConfig {
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Random-walk standard deviations on `(ln b, ln c, ln β)`.
    pub proposal_scales: [f64; 3],
    /// Tune the scales during burn-in towards acceptance in [0.2, 0.5].
    pub adapt: bool,
    /// Multiplier on the log-likelihood; 0 samples the prior.
    pub likelihood_weight: f64,
    /// Starting point; defaults to the MLE start values.
    pub init: Option<KumIwParams>,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            n_iter: 100_000,
            burn_in: 20_000,
            thin: 20,
            seed: 42,
            proposal_scales: [0.1; 3],
            adapt: true,
            likelihood_weight: 1.0,
            init: None,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.n_iter {
            return Err(Error::domain(format!(
                "burn-in ({}) must be smaller than the number of iterations ({})",
                self.burn_in, self.n_iter
            )));
        }
        if self.thin == 0 {
            return Err(Error::domain("thin must be at least 1"));
        }
        if self.proposal_scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::domain("proposal scales must be positive"));
        }
        if !(self.likelihood_weight >= 0.0 && self.likelihood_weight.is_finite()) {
            return Err(Error::domain("likelihood weight must be a nonnegative number"));
        }
        Ok(())
    }
}

/// One retained state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainRow {
    pub iter: usize,
    pub b: f64,
    pub c: f64,
    pub beta: f64,
    pub log_post: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McmcChain {
    /// Iteration index (1-based) of each retained draw.
    pub iterations: Vec<usize>,
    pub draws: Vec<KumIwParams>,
    pub log_post_trace: Vec<f64>,
    /// Post-burn-in acceptance rate per coordinate.
    pub acceptance_rates: [f64; 3],
    /// Proposal scales in effect after burn-in.
    pub proposal_scales: [f64; 3],
    pub warnings: Vec<String>,
}

impl McmcChain {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn column(&self, which: Param) -> Vec<f64> {
        self.draws.iter().map(|p| which.get(p)).collect()
    }

    pub fn rows(&self) -> Vec<ChainRow> {
        self.iterations
            .iter()
            .zip(&self.draws)
            .zip(&self.log_post_trace)
            .map(|((&iter, p), &log_post)| ChainRow {
                iter,
                b: p.b(),
                c: p.c(),
                beta: p.beta(),
                log_post,
            })
            .collect()
    }

    /// `iter,b,c,beta,log_post`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in self.rows() {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Reads rows written by [`McmcChain::write_csv`].
pub fn read_chain_csv<R: Read>(r: R) -> Result<Vec<ChainRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| Error::data(Some(i + 2), format!("malformed chain row: {e}"))))
        .collect()
}

const ADAPT_WINDOW: usize = 100;

/// Runs the sampler. Deterministic for a fixed `cfg.seed`.
pub fn run_mcmc(d: &CensoredDataset, prior: &PriorSpec, cfg: &McmcConfig) -> Result<McmcChain> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = match cfg.init {
        Some(p) => p,
        None => default_init(d)?,
    };
    let weight = cfg.likelihood_weight;
    let data_sums = |p: &KumIwParams| if weight == 0.0 { Sums::default() } else { sums(p, d) };
    let mut state_sums = data_sums(&state);
    let mut scales = cfg.proposal_scales;
    let mut window_accepts = [0usize; 3];
    let mut post_accepts = [0usize; 3];
    let mut chain = McmcChain {
        iterations: Vec::new(),
        draws: Vec::new(),
        log_post_trace: Vec::new(),
        acceptance_rates: [0.0; 3],
        proposal_scales: scales,
        warnings: Vec::new(),
    };
    for iter in 1..=cfg.n_iter {
        for which in Param::ALL {
            let i = which.index();
            let eta = which.get(&state).ln();
            let step: f64 = rng.sample(StandardNormal);
            let eta_new = eta + scales[i] * step;
            let u: f64 = rng.random();
            let Ok(proposal) = which.with(&state, eta_new.exp()) else {
                continue;
            };
            let proposal_sums = data_sums(&proposal);
            let current = conditional_from_sums(which, &state, &state_sums, prior, weight);
            let candidate = conditional_from_sums(which, &proposal, &proposal_sums, prior, weight);
            if u < acceptance_probability(current, candidate, eta, eta_new) {
                state = proposal;
                state_sums = proposal_sums;
                if iter <= cfg.burn_in {
                    window_accepts[i] += 1;
                } else {
                    post_accepts[i] += 1;
                }
            }
        }
        if iter <= cfg.burn_in && iter % ADAPT_WINDOW == 0 {
            for i in 0..3 {
                let rate = window_accepts[i] as f64 / ADAPT_WINDOW as f64;
                if window_accepts[i] == 0 {
                    chain.warnings.push(format!(
                        "no {} proposals accepted in iterations {}..{}",
                        Param::ALL[i].name(),
                        iter + 1 - ADAPT_WINDOW,
                        iter
                    ));
                }
                if cfg.adapt {
                    if rate < 0.2 {
                        scales[i] *= 0.7;
                    } else if rate > 0.5 {
                        scales[i] *= 1.4;
                    }
                }
                window_accepts[i] = 0;
            }
        }
        if iter > cfg.burn_in && (iter - cfg.burn_in - 1).is_multiple_of(cfg.thin) {
            chain.iterations.push(iter);
            chain.draws.push(state);
            chain.log_post_trace.push(log_posterior_weighted(&state, d, prior, weight));
        }
    }
    let kept = (cfg.n_iter - cfg.burn_in) as f64;
    chain.acceptance_rates = post_accepts.map(|a| a as f64 / kept);
    chain.proposal_scales = scales;
    Ok(chain)
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub parameter: String,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub median: f64,
    pub q975: f64,
}

/// Posterior means, standard deviations and quantiles per parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub rows: Vec<SummaryRow>,
}

impl PosteriorSummary {
    pub const HEADER: [&'static str; 6] = ["Parameter", "Mean", "SD", "2.5%", "Median", "97.5%"];

    pub fn row(&self, which: Param) -> &SummaryRow {
        &self.rows[which.index()]
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(Self::HEADER)?;
        for r in &self.rows {
            out.write_record([
                r.parameter.clone(),
                format_float(r.mean),
                format_float(r.sd),
                format_float(r.q025),
                format_float(r.median),
                format_float(r.q975),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

impl fmt::Display for PosteriorSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = Self::HEADER;
        writeln!(f, "{:<10}{:>12}{:>12}{:>12}{:>12}{:>12}", h[0], h[1], h[2], h[3], h[4], h[5])?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<10}{:>12.4}{:>12.4}{:>12.4}{:>12.4}{:>12.4}",
                r.parameter, r.mean, r.sd, r.q025, r.median, r.q975
            )?;
        }
        Ok(())
    }
}

fn summary_row(name: &str, mut v: Vec<f64>) -> SummaryRow {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = if v.len() > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    v.sort_by(f64::total_cmp);
    SummaryRow {
        parameter: name.to_string(),
        mean,
        sd,
        q025: quantile_sorted(&v, 0.025),
        median: quantile_sorted(&v, 0.5),
        q975: quantile_sorted(&v, 0.975),
    }
}

pub fn summarize(chain: &McmcChain) -> Result<PosteriorSummary> {
    if chain.is_empty() {
        return Err(Error::domain("cannot summarize an empty chain"));
    }
    Ok(PosteriorSummary {
        rows: Param::ALL
            .iter()
            .map(|&w| summary_row(w.name(), chain.column(w)))
            .collect(),
    })
}

/// `(mean(second half) - mean(first half)) / se`, with standard errors from
/// batch means of each half. Values beyond 3 in magnitude suggest drift.
pub fn split_half_z_score(trace: &[f64]) -> f64 {
    let half = trace.len() / 2;
    let (a, b) = (&trace[..half], &trace[trace.len() - half..]);
    let batch_var = |x: &[f64]| {
        let n_batches = 20usize.min(x.len());
        let size = x.len() / n_batches;
        let means: Vec<f64> = (0..n_batches)
            .map(|k| x[k * size..(k + 1) * size].iter().sum::<f64>() / size as f64)
            .collect();
        let m = means.iter().sum::<f64>() / n_batches as f64;
        let v = means.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (n_batches as f64 - 1.0);
        (m, v / n_batches as f64)
    };
    let (ma, va) = batch_var(a);
    let (mb, vb) = batch_var(b);
    (mb - ma) / (va + vb).sqrt()
}
