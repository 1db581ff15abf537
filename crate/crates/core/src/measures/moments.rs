use crate::distribution::KumIwParams;
use crate::error::{Error, Result};
use crate::series::{gamma_fn, BinomialExpKernel, SeriesConfig};
use crate::specfun::BinomialWeights;

/// Order of a raw moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MomentSpec {
    k: u32,
}

impl MomentSpec {
    pub fn new(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("moment order must be at least 1"));
        }
        Ok(Self { k })
    }

    pub fn order(&self) -> u32 {
        self.k
    }

    /// `E[T^k]` is finite iff `k < b·β`.
    pub fn exists_for(&self, p: &KumIwParams) -> bool {
        (self.k as f64) < p.moment_limit()
    }

    fn require(&self, p: &KumIwParams) -> Result<()> {
        if self.exists_for(p) {
            Ok(())
        } else {
            Err(Error::MomentDoesNotExist {
                order: self.k as f64,
                limit: p.moment_limit(),
            })
        }
    }
}

/// `E[T^k] = b c^k Σ_r w_r (r+1)^(k/β - 1) Γ(1 - k/β)`, evaluated through the
/// split series of [`BinomialExpKernel`] so that non-integer `b < 1` converges.
pub fn moment(p: &KumIwParams, k: u32, cfg: &SeriesConfig) -> Result<f64> {
    let spec = MomentSpec::new(k)?;
    spec.require(p)?;
    let kf = k as f64;
    let kernel = BinomialExpKernel::new(1.0 - kf / p.beta(), 1.0, p.b() - 1.0)?;
    Ok(p.b() * p.c().powf(kf) * kernel.complete(cfg)?)
}

pub fn mean(p: &KumIwParams, cfg: &SeriesConfig) -> Result<f64> {
    moment(p, 1, cfg)
}

/// The termwise series for `E[T^k]` summed literally, term by term, until the
/// latest term falls below `tol · |sum|`. Terminates exactly for integer `b`;
/// needs `k < β`.
pub fn moment_series_direct(p: &KumIwParams, k: u32, cfg: &SeriesConfig) -> Result<f64> {
    let spec = MomentSpec::new(k)?;
    spec.require(p)?;
    let kf = k as f64;
    if kf >= p.beta() {
        return Err(Error::domain(format!(
            "the direct moment series needs k < beta (k = {k}, beta = {})",
            p.beta()
        )));
    }
    let weights = BinomialWeights::for_exponent(p.b() - 1.0);
    let finite = weights.terminates_after();
    let expo = kf / p.beta() - 1.0;
    let mut sum = 0.0;
    let limit = finite.unwrap_or(cfg.max_terms);
    let mut converged = finite.is_some();
    for (r, w) in weights.take(limit).enumerate() {
        let term = w * ((r + 1) as f64).powf(expo);
        sum += term;
        if finite.is_none() && r > 0 && term.abs() <= cfg.tol * sum.abs() {
            converged = true;
            break;
        }
    }
    let scale = p.b() * p.c().powf(kf) * gamma_fn(1.0 - kf / p.beta());
    if !converged {
        return Err(Error::SeriesNonConvergence {
            terms: limit,
            partial_sum: scale * sum,
        });
    }
    Ok(scale * sum)
}

/// Value of a truncated moment generating function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfTruncation {
    pub value: f64,
    /// Orders `k ≥ 1` that entered the sum.
    pub included: usize,
    /// Orders dropped because `E[T^k]` is infinite.
    pub excluded: usize,
    /// Set whenever any order was dropped.
    pub warning: bool,
}

/// `Σ_{k=0}^{n} z^k E[T^k] / k!` over the orders whose moments exist.
pub fn mgf_truncated(p: &KumIwParams, z: f64, n_terms: u32, cfg: &SeriesConfig) -> Result<MgfTruncation> {
    if !(z.abs() < 1.0) {
        return Err(Error::domain(format!("generating function argument must satisfy |z| < 1, got {z}")));
    }
    let mut value = 1.0;
    let mut included = 0;
    let mut excluded = 0;
    let mut coef = 1.0;
    for k in 1..=n_terms {
        coef *= z / k as f64;
        if (k as f64) < p.moment_limit() {
            value += coef * moment(p, k, cfg)?;
            included += 1;
        } else {
            excluded += 1;
        }
    }
    Ok(MgfTruncation {
        value,
        included,
        excluded,
        warning: excluded > 0,
    })
}

/// `K(z) = ln M(z)` from the truncated generating function.
pub fn cumulant_generating_function(
    p: &KumIwParams,
    z: f64,
    n_terms: u32,
    cfg: &SeriesConfig,
) -> Result<f64> {
    let m = mgf_truncated(p, z, n_terms, cfg)?;
    if m.value > 0.0 {
        Ok(m.value.ln())
    } else {
        Err(Error::domain(format!(
            "truncated generating function is non-positive ({}) at z = {z}",
            m.value
        )))
    }
}

/// Density from the exponential expansion
/// `f(t) = β b c^β t^(-β-1) Σ_i w_i e^(-(i+1)(c/t)^β)`.
pub fn expanded_pdf(p: &KumIwParams, t: f64, cfg: &SeriesConfig) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("time must be positive and finite, got {t}")));
    }
    let x = p.z(t);
    let ln_pre = p.beta().ln() + p.b().ln() + p.beta() * p.c().ln() - (p.beta() + 1.0) * t.ln();
    let weights = BinomialWeights::for_exponent(p.b() - 1.0);
    let finite = weights.terminates_after();
    let limit = finite.unwrap_or(cfg.max_terms);
    let mut sum = 0.0;
    let mut small_run = 0;
    for (i, w) in weights.take(limit).enumerate() {
        let term = w * (-(i as f64 + 1.0) * x).exp();
        sum += term;
        if finite.is_none() {
            if term.abs() <= cfg.tol * sum.abs() {
                small_run += 1;
                if small_run >= 3 {
                    return Ok(ln_pre.exp() * sum);
                }
            } else {
                small_run = 0;
            }
        }
    }
    if finite.is_some() {
        Ok(ln_pre.exp() * sum)
    } else {
        Err(Error::SeriesNonConvergence {
            terms: limit,
            partial_sum: ln_pre.exp() * sum,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn p(b: f64, c: f64, beta: f64) -> KumIwParams {
        KumIwParams::new(b, c, beta).unwrap()
    }

    #[test]
    fn closed_form_reductions_at_b_one() {
        let cfg = SeriesConfig::default();
        assert_relative_eq!(moment(&p(1.0, 1.0, 2.0), 1, &cfg).unwrap(), PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(moment(&p(1.0, 2.0, 4.0), 2, &cfg).unwrap(), 4.0 * PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(moment(&p(1.0, 2.0, 4.0), 2, &cfg).unwrap(), 7.089_815_4, max_relative = 1e-7);
    }

    #[test]
    fn nonexistent_moments() {
        let cfg = SeriesConfig::default();
        assert!(matches!(moment(&p(1.0, 1.0, 2.0), 2, &cfg), Err(Error::MomentDoesNotExist { .. })));
        assert!(matches!(moment(&p(0.5, 1.0, 1.5), 1, &cfg), Err(Error::MomentDoesNotExist { .. })));
        assert!(moment(&p(1.0, 1.0, 2.0), 0, &cfg).is_err());
    }

    #[test]
    fn direct_series_matches_when_it_converges() {
        let cfg = SeriesConfig::default();
        for q in [p(2.0, 1.5, 3.0), p(4.0, 0.5, 2.5), p(3.5, 1.0, 4.0)] {
            let a = moment(&q, 1, &cfg).unwrap();
            let d = moment_series_direct(&q, 1, &cfg).unwrap();
            assert_relative_eq!(a, d, max_relative = 1e-9);
        }
    }

    #[test]
    fn direct_series_reports_slow_convergence() {
        let cfg = SeriesConfig::new(1e-12, 500).unwrap();
        let err = moment_series_direct(&p(0.5, 1.0, 2.5), 1, &cfg).unwrap_err();
        assert!(matches!(err, Error::SeriesNonConvergence { terms: 500, .. }));
    }

    #[test]
    fn mgf_examples() {
        let cfg = SeriesConfig::default();
        let q = p(2.0, 1.5, 3.0);
        assert_eq!(mgf_truncated(&q, 0.0, 5, &cfg).unwrap().value, 1.0);
        let one = mgf_truncated(&q, 0.3, 1, &cfg).unwrap();
        assert_relative_eq!(one.value, 1.0 + 0.3 * mean(&q, &cfg).unwrap(), max_relative = 1e-15);
        let heavy = mgf_truncated(&p(1.0, 1.0, 0.8), 0.5, 4, &cfg).unwrap();
        assert_eq!(heavy.value, 1.0);
        assert!(heavy.warning);
        assert_eq!(heavy.excluded, 4);
        assert!(mgf_truncated(&q, 1.0, 2, &cfg).is_err());
        assert_eq!(cumulant_generating_function(&q, 0.0, 3, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn expanded_pdf_terminates_for_integer_b() {
        let cfg = SeriesConfig::new(1e-12, 3).unwrap();
        // b = 3 needs exactly three terms even with max_terms = 3.
        let q = p(3.0, 1.2, 1.7);
        assert_relative_eq!(expanded_pdf(&q, 0.9, &cfg).unwrap(), q.pdf(0.9).unwrap(), max_relative = 1e-13);
        let one = p(1.0, 1.2, 1.7);
        assert_relative_eq!(expanded_pdf(&one, 0.9, &cfg).unwrap(), one.pdf(0.9).unwrap(), max_relative = 1e-14);
    }
}
