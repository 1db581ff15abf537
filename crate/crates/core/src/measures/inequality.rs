use super::moments::mean;
use crate::distribution::KumIwParams;
use crate::error::{Error, Result};
use crate::series::{BinomialExpKernel, SeriesConfig};

fn first_moment_kernel(p: &KumIwParams) -> Result<BinomialExpKernel> {
    BinomialExpKernel::new(1.0 - 1.0 / p.beta(), 1.0, p.b() - 1.0)
}

/// `∫_0^q t f(t) dt`, finite for every `q < ∞`.
pub fn partial_first_moment(p: &KumIwParams, q: f64, cfg: &SeriesConfig) -> Result<f64> {
    if !(q >= 0.0) {
        return Err(Error::domain(format!("upper limit must be nonnegative, got {q}")));
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    if q.is_infinite() {
        return mean(p, cfg);
    }
    let lo = p.z(q);
    Ok(p.b() * p.c() * first_moment_kernel(p)?.integral(lo, f64::INFINITY, cfg)?)
}

/// `∫_x^∞ t f(t) dt`; needs a finite mean.
pub fn upper_first_moment(p: &KumIwParams, x: f64, cfg: &SeriesConfig) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("lower limit must be nonnegative, got {x}")));
    }
    if p.moment_limit() <= 1.0 {
        return Err(Error::MomentDoesNotExist {
            order: 1.0,
            limit: p.moment_limit(),
        });
    }
    if x == 0.0 {
        return mean(p, cfg);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let hi = p.z(x);
    Ok(p.b() * p.c() * first_moment_kernel(p)?.integral(0.0, hi, cfg)?)
}

/// `E|T - μ| = 2μF(μ) - 2μ + 2∫_μ^∞ t f(t) dt`.
pub fn mean_deviation_about_mean(p: &KumIwParams, cfg: &SeriesConfig) -> Result<f64> {
    let mu = mean(p, cfg)?;
    let upper = upper_first_moment(p, mu, cfg)?;
    Ok(2.0 * mu * p.cdf(mu)? - 2.0 * mu + 2.0 * upper)
}

/// `E|T - M| = 2∫_M^∞ t f(t) dt - μ` with `M` the median.
pub fn mean_deviation_about_median(p: &KumIwParams, cfg: &SeriesConfig) -> Result<f64> {
    let mu = mean(p, cfg)?;
    let upper = upper_first_moment(p, p.median(), cfg)?;
    Ok(2.0 * upper - mu)
}

/// One row of the Bonferroni and Lorenz curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityPoint {
    pub prob: f64,
    pub quantile: f64,
    pub bonferroni: f64,
    pub lorenz: f64,
}

/// Bonferroni `B(p) = I(q)/(pμ)` and Lorenz `L(p) = p·B(p)` at each level,
/// with `I(q) = ∫_0^q t f` and `q = F⁻¹(p)`.
pub fn inequality_curves(p: &KumIwParams, probs: &[f64], cfg: &SeriesConfig) -> Result<Vec<InequalityPoint>> {
    let mu = mean(p, cfg)?;
    probs
        .iter()
        .map(|&prob| {
            let q = p.quantile(prob)?;
            let bonferroni = partial_first_moment(p, q, cfg)? / (prob * mu);
            Ok(InequalityPoint {
                prob,
                quantile: q,
                bonferroni,
                lorenz: prob * bonferroni,
            })
        })
        .collect()
}

pub fn bonferroni(p: &KumIwParams, prob: f64, cfg: &SeriesConfig) -> Result<f64> {
    Ok(inequality_curves(p, &[prob], cfg)?[0].bonferroni)
}

pub fn lorenz(p: &KumIwParams, prob: f64, cfg: &SeriesConfig) -> Result<f64> {
    Ok(inequality_curves(p, &[prob], cfg)?[0].lorenz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(b: f64, c: f64, beta: f64) -> KumIwParams {
        KumIwParams::new(b, c, beta).unwrap()
    }

    #[test]
    fn pieces_add_up_to_the_mean() {
        let cfg = SeriesConfig::default();
        for q in [p(2.0, 1.0, 3.0), p(0.5, 1.0, 4.0), p(4.0, 0.5, 1.5)] {
            let mu = mean(&q, &cfg).unwrap();
            for x in [0.3, 1.0, 2.5] {
                let total = partial_first_moment(&q, x, &cfg).unwrap() + upper_first_moment(&q, x, &cfg).unwrap();
                assert_relative_eq!(total, mu, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn deviations_are_ordered() {
        let cfg = SeriesConfig::default();
        let q = p(2.0, 1.5, 3.0);
        let d1 = mean_deviation_about_mean(&q, &cfg).unwrap();
        let d2 = mean_deviation_about_median(&q, &cfg).unwrap();
        assert!(d2 > 0.0 && d2 <= d1);
    }

    #[test]
    fn heavy_tail_has_no_deviation() {
        let cfg = SeriesConfig::default();
        let q = p(0.5, 1.0, 1.5);
        assert!(matches!(mean_deviation_about_mean(&q, &cfg), Err(Error::MomentDoesNotExist { .. })));
        assert!(matches!(lorenz(&q, 0.5, &cfg), Err(Error::MomentDoesNotExist { .. })));
    }

    #[test]
    fn lorenz_is_prob_times_bonferroni() {
        let cfg = SeriesConfig::default();
        let rows = inequality_curves(&p(1.0, 1.0, 3.0), &[0.1, 0.5, 0.9], &cfg).unwrap();
        for r in rows {
            assert_eq!(r.lorenz, r.prob * r.bonferroni);
            assert!(r.lorenz <= r.prob);
        }
        assert!(bonferroni(&p(1.0, 1.0, 3.0), 1.0, &cfg).is_err());
    }
}
