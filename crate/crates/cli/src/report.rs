//! JSON report layouts. Bump `SCHEMA_VERSION` whenever a field changes meaning.

use kumiw::bayes::{McmcChain, McmcConfig, PosteriorSummary, PriorSpec, SummaryRow};
use kumiw::mle::{FitResult, LrTestResult, ReplicateOutcome, StudySummary};
use kumiw::{CensoredDataset, KumIwParams};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct DatasetInfo {
    pub name: String,
    pub n: usize,
    pub events: usize,
    pub censored: usize,
}

impl From<&CensoredDataset> for DatasetInfo {
    fn from(d: &CensoredDataset) -> Self {
        DatasetInfo {
            name: d.name().to_string(),
            n: d.len(),
            events: d.n_events(),
            censored: d.n_censored(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ParamEstimate {
    pub name: &'static str,
    pub estimate: f64,
    /// False for parameters pinned by the sub-model.
    pub free: bool,
    pub std_error: Option<f64>,
    pub ci_lower: Option<f64>,
    pub ci_upper: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct LrEntry {
    pub null_model: String,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub full_loglik: f64,
    pub null_loglik: f64,
}

impl From<&LrTestResult> for LrEntry {
    fn from(r: &LrTestResult) -> Self {
        LrEntry {
            null_model: r.null_model.to_string(),
            statistic: r.statistic,
            df: r.df,
            p_value: r.p_value,
            full_loglik: r.full_loglik,
            null_loglik: r.null_loglik,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct MleReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub dataset: DatasetInfo,
    pub model: String,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub loglik: f64,
    pub aic: f64,
    pub level: f64,
    pub estimates: KumIwParams,
    pub parameters: Vec<ParamEstimate>,
    pub lr_tests: Vec<LrEntry>,
}

impl MleReport {
    pub fn new(d: &CensoredDataset, fit: &FitResult, lr: &[LrTestResult]) -> Self {
        let free = fit.free_names();
        let se = fit.std_errors();
        let all = [("b", fit.estimates.b()), ("c", fit.estimates.c()), ("beta", fit.estimates.beta())];
        let parameters = all
            .iter()
            .map(|&(name, estimate)| {
                let slot = free.iter().position(|f| *f == name);
                ParamEstimate {
                    name,
                    estimate,
                    free: slot.is_some(),
                    std_error: slot.and_then(|i| se.as_ref().map(|s| s[i])),
                    ci_lower: slot.and_then(|i| fit.ci.as_ref().map(|c| c[i].0)),
                    ci_upper: slot.and_then(|i| fit.ci.as_ref().map(|c| c[i].1)),
                }
            })
            .collect();
        MleReport {
            schema_version: SCHEMA_VERSION,
            command: "fit-mle",
            dataset: d.into(),
            model: fit.model.to_string(),
            converged: fit.converged,
            iterations: fit.iterations,
            gradient_norm: fit.grad_norm,
            loglik: fit.loglik,
            aic: fit.aic(),
            level: fit.level,
            estimates: fit.estimates,
            parameters,
            lr_tests: lr.iter().map(LrEntry::from).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Triple {
    pub b: f64,
    pub c: f64,
    pub beta: f64,
}

impl From<[f64; 3]> for Triple {
    fn from(v: [f64; 3]) -> Self {
        Triple { b: v[0], c: v[1], beta: v[2] }
    }
}

#[derive(Debug, Serialize)]
pub struct ReplicateEntry {
    pub seed: u64,
    pub converged: bool,
    pub estimates: Option<KumIwParams>,
    pub loglik: Option<f64>,
    pub loglik_truth: f64,
}

#[derive(Debug, Serialize)]
pub struct StudyReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub truth: KumIwParams,
    pub n: usize,
    pub censor_rate: f64,
    pub base_seed: u64,
    pub replicates: usize,
    pub converged: usize,
    pub level: f64,
    pub median_abs_rel_error: Triple,
    pub coverage: Triple,
    pub runs: Vec<ReplicateEntry>,
}

impl StudyReport {
    pub fn new(
        truth: KumIwParams,
        n: usize,
        censor_rate: f64,
        base_seed: u64,
        level: f64,
        outcomes: &[ReplicateOutcome],
        summary: &StudySummary,
    ) -> Self {
        StudyReport {
            schema_version: SCHEMA_VERSION,
            command: "fit-mle --replicates",
            truth,
            n,
            censor_rate,
            base_seed,
            replicates: summary.replicates,
            converged: summary.converged,
            level,
            median_abs_rel_error: summary.median_abs_rel_error.into(),
            coverage: summary.coverage.into(),
            runs: outcomes
                .iter()
                .map(|o| ReplicateEntry {
                    seed: o.seed,
                    converged: o.fit.as_ref().is_some_and(|f| f.converged),
                    estimates: o.fit.as_ref().map(|f| f.estimates),
                    loglik: o.fit.as_ref().map(|f| f.loglik),
                    loglik_truth: o.loglik_truth,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SamplerSettings {
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub adapt: bool,
}

#[derive(Debug, Serialize)]
pub struct BayesReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub dataset: DatasetInfo,
    pub prior: PriorSpec,
    pub sampler: SamplerSettings,
    pub draws: usize,
    pub acceptance_rates: Triple,
    pub proposal_scales: Triple,
    pub warnings: Vec<String>,
    pub summary: Vec<SummaryRow>,
}

impl BayesReport {
    pub fn new(d: &CensoredDataset, prior: &PriorSpec, cfg: &McmcConfig, chain: &McmcChain, summary: &PosteriorSummary) -> Self {
        BayesReport {
            schema_version: SCHEMA_VERSION,
            command: "fit-bayes",
            dataset: d.into(),
            prior: *prior,
            sampler: SamplerSettings {
                n_iter: cfg.n_iter,
                burn_in: cfg.burn_in,
                thin: cfg.thin,
                seed: cfg.seed,
                adapt: cfg.adapt,
            },
            draws: chain.len(),
            acceptance_rates: chain.acceptance_rates.into(),
            proposal_scales: chain.proposal_scales.into(),
            warnings: chain.warnings.clone(),
            summary: summary.rows.clone(),
        }
    }
}

/// Accepts either a fit-mle report or a bare `{b, c, beta}` table.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ParamsSource {
    Report { estimates: KumIwParams },
    Bare(KumIwParams),
}

impl ParamsSource {
    pub fn params(self) -> KumIwParams {
        match self {
            ParamsSource::Report { estimates } => estimates,
            ParamsSource::Bare(p) => p,
        }
    }
}
