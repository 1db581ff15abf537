use super::integrate_x_space;
use crate::distribution::KumIwParams;
use crate::error::{Error, Result};
use crate::series::{BinomialExpKernel, SeriesConfig};
use crate::specfun::ln_gamma_unchecked;

fn check_rank(r: usize, n: usize) -> Result<()> {
    if r >= 1 && r <= n {
        Ok(())
    } else {
        Err(Error::domain(format!("rank must satisfy 1 <= r <= n, got r = {r}, n = {n}")))
    }
}

/// `ln(n! / ((r-1)! (n-r)!))`.
fn ln_rank_coefficient(r: usize, n: usize) -> f64 {
    ln_gamma_unchecked(n as f64 + 1.0) - ln_gamma_unchecked(r as f64) - ln_gamma_unchecked((n - r) as f64 + 1.0)
}

/// `ln(F^(r-1) S^(n-r))` given `ln S`.
fn ln_rank_factor(r: usize, n: usize, ln_s: f64) -> f64 {
    let mut v = 0.0;
    if r > 1 {
        v += (r - 1) as f64 * (-ln_s.exp_m1()).ln();
    }
    if n > r {
        v += (n - r) as f64 * ln_s;
    }
    v
}

/// Density of the `r`-th smallest of `n` independent draws.
pub fn order_stat_pdf(p: &KumIwParams, r: usize, n: usize, t: f64) -> Result<f64> {
    check_rank(r, n)?;
    let ln_f = p.log_pdf(t)?;
    let ln_s = p.log_survival(t)?;
    Ok((ln_rank_coefficient(r, n) + ln_rank_factor(r, n, ln_s) + ln_f).exp())
}

fn check_order_moment(p: &KumIwParams, r: usize, n: usize, k: u32) -> Result<()> {
    check_rank(r, n)?;
    if k == 0 {
        return Err(Error::domain("moment order must be at least 1"));
    }
    let limit = p.moment_limit() * (n - r + 1) as f64;
    if k as f64 >= limit {
        return Err(Error::MomentDoesNotExist { order: k as f64, limit });
    }
    Ok(())
}

/// `E[T_{r:n}^k]` by quadrature in `x = (c/t)^β`. Exists iff `k < bβ(n-r+1)`.
pub fn order_stat_moment(p: &KumIwParams, r: usize, n: usize, k: u32) -> Result<f64> {
    check_order_moment(p, r, n, k)?;
    let (b, c, beta) = (p.b(), p.c(), p.beta());
    let kf = k as f64;
    let ln_coef = ln_rank_coefficient(r, n) + kf * c.ln() + b.ln();
    integrate_x_space(|x| {
        let ln_s = b * crate::distribution::log1m_exp(x);
        let mut v = ln_coef - kf / beta * x.ln() - x + ln_rank_factor(r, n, ln_s);
        if b != 1.0 {
            v += (b - 1.0) * crate::distribution::log1m_exp(x);
        }
        v.exp()
    })
}

/// The same moment from the finite binomial expansion of `F^(r-1)`:
/// `C b c^k Σ_j (-1)^j C(r-1, j) K(1 - k/β, 1, b(n-r+j+1) - 1)`.
/// Alternating, so it loses accuracy for large `r`.
pub fn order_stat_moment_series(p: &KumIwParams, r: usize, n: usize, k: u32, cfg: &SeriesConfig) -> Result<f64> {
    check_order_moment(p, r, n, k)?;
    let (b, c, beta) = (p.b(), p.c(), p.beta());
    let kf = k as f64;
    let mut sum = 0.0;
    let mut binom = 1.0;
    for j in 0..r {
        if j > 0 {
            binom *= (r - j) as f64 / j as f64;
        }
        let nu = b * (n - r + j + 1) as f64 - 1.0;
        let term = binom * BinomialExpKernel::new(1.0 - kf / beta, 1.0, nu)?.complete(cfg)?;
        sum += if j % 2 == 0 { term } else { -term };
    }
    Ok(ln_rank_coefficient(r, n).exp() * b * c.powf(kf) * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::moment;
    use approx::assert_relative_eq;

    fn p(b: f64, c: f64, beta: f64) -> KumIwParams {
        KumIwParams::new(b, c, beta).unwrap()
    }

    #[test]
    fn single_draw_is_the_parent() {
        let q = p(2.0, 1.0, 2.0);
        for t in [0.3, 1.0, 4.0] {
            assert_relative_eq!(order_stat_pdf(&q, 1, 1, t).unwrap(), q.pdf(t).unwrap(), max_relative = 1e-14);
        }
        assert_relative_eq!(
            order_stat_moment(&q, 1, 1, 1).unwrap(),
            moment(&q, 1, &SeriesConfig::default()).unwrap(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn maximum_density() {
        let q = p(2.0, 1.0, 2.0);
        let t = 1.3;
        let expected = 5.0 * q.cdf(t).unwrap().powi(4) * q.pdf(t).unwrap();
        assert_relative_eq!(order_stat_pdf(&q, 5, 5, t).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn rank_validation() {
        let q = p(2.0, 1.0, 2.0);
        assert!(order_stat_pdf(&q, 0, 3, 1.0).is_err());
        assert!(order_stat_pdf(&q, 4, 3, 1.0).is_err());
        assert!(order_stat_moment(&q, 0, 3, 1).is_err());
    }

    #[test]
    fn minimum_has_more_moments() {
        // bβ = 1 so the parent mean is infinite, but the minimum of three has moments below 3.
        let q = p(0.5, 1.0, 2.0);
        assert!(order_stat_moment(&q, 3, 3, 1).is_err());
        let v = order_stat_moment(&q, 1, 3, 2).unwrap();
        let s = order_stat_moment_series(&q, 1, 3, 2, &SeriesConfig::default()).unwrap();
        assert_relative_eq!(v, s, max_relative = 1e-8);
    }

    #[test]
    fn series_matches_quadrature() {
        let q = p(2.0, 1.0, 3.0);
        let cfg = SeriesConfig::default();
        for (r, n) in [(3, 4), (2, 5), (1, 2), (2, 2)] {
            let a = order_stat_moment(&q, r, n, 1).unwrap();
            let s = order_stat_moment_series(&q, r, n, 1, &cfg).unwrap();
            assert_relative_eq!(a, s, max_relative = 1e-8);
        }
    }
}
