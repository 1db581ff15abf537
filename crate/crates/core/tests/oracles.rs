mod common;

use approx::{assert_abs_diff_eq, assert_relative_eq};
use kumiw::measures::{self, SeriesConfig};
use kumiw::specfun;
use kumiw::{Error, KumIwParams};

fn p(b: f64, c: f64, beta: f64) -> KumIwParams {
    KumIwParams::new(b, c, beta).unwrap()
}

fn cfg() -> SeriesConfig {
    SeriesConfig::default()
}

#[test]
fn ln_gamma_matches_stirling_reference() {
    for x in [0.01, 0.3, 0.5, 1.5, 2.5, 3.7, 7.25, 12.0, 33.3, 170.5] {
        let a = specfun::ln_gamma(x).unwrap();
        let b = common::ln_gamma(x);
        assert!((a - b).abs() <= 1e-13 * b.abs().max(1.0), "x = {x}: {a} vs {b}");
    }
}

#[test]
fn incomplete_gamma_matches_quadrature() {
    for (a, x) in [(0.5, 0.3), (1.7, 2.0), (3.0, 1.0), (4.5, 9.0), (0.2, 5.0)] {
        let lower = common::integrate_interval(|s: f64| s.powf(a - 1.0) * (-s).exp(), 0.0, x);
        assert_relative_eq!(specfun::lower_incomplete_gamma(a, x).unwrap(), lower, max_relative = 1e-11);
        let upper = common::integrate_positive_line(|u: f64| (x + u).powf(a - 1.0) * (-(x + u)).exp());
        assert_relative_eq!(specfun::upper_incomplete_gamma(a, x).unwrap(), upper, max_relative = 1e-11);
    }
}

#[test]
fn grid_moments_match_quadrature() {
    for q in common::grid() {
        for k in [1u32, 2] {
            let result = measures::moment(&q, k, &cfg());
            if (k as f64) < q.b() * q.beta() {
                let series = result.unwrap();
                let oracle = common::moment(&q, k as f64);
                assert_relative_eq!(series, oracle, max_relative = 1e-8);
            } else {
                assert!(matches!(result, Err(Error::MomentDoesNotExist { .. })), "{q} k = {k}");
            }
        }
    }
}

#[test]
fn moment_example_values() {
    let q = p(2.5, 1.0, 3.0);
    assert_relative_eq!(measures::moment(&q, 1, &cfg()).unwrap(), common::moment(&q, 1.0), max_relative = 1e-9);
    assert_relative_eq!(
        measures::moment(&p(1.0, 2.0, 4.0), 2, &cfg()).unwrap(),
        7.089_815_4,
        max_relative = 1e-7
    );
}

#[test]
fn mgf_composes_moments() {
    let q = p(1.0, 1.0, 4.0);
    let z: f64 = 0.5;
    let expected = 1.0 + z * common::moment(&q, 1.0) + z * z / 2.0 * common::moment(&q, 2.0) + z.powi(3) / 6.0 * common::moment(&q, 3.0);
    let got = measures::mgf_truncated(&q, z, 3, &cfg()).unwrap();
    assert_eq!(got.excluded, 0);
    assert_relative_eq!(got.value, expected, max_relative = 1e-9);
}

#[test]
fn expanded_density_matches_direct() {
    let q = p(2.5, 1.0, 2.0);
    assert_relative_eq!(measures::expanded_pdf(&q, 0.8, &cfg()).unwrap(), common::pdf(&q, 0.8), max_relative = 1e-10);
    for q in [p(0.5, 1.0, 1.5), p(4.0, 3.0, 2.5), p(1.7, 0.5, 4.0)] {
        for t in [0.3, 0.9, 2.0].map(|r| r * q.c()) {
            let want = common::pdf(&q, t);
            assert_relative_eq!(measures::expanded_pdf(&q, t, &cfg()).unwrap(), want, max_relative = 1e-8);
        }
    }
    // Far in the tail the weights decay only algebraically for non-integer b.
    let far = measures::expanded_pdf(&p(1.7, 0.5, 4.0), 6.0, &cfg());
    assert!(matches!(far, Err(Error::SeriesNonConvergence { .. })));
    // Integer b terminates wherever t is.
    let q = p(4.0, 0.5, 4.0);
    assert_relative_eq!(measures::expanded_pdf(&q, 6.0, &cfg()).unwrap(), common::pdf(&q, 6.0), max_relative = 1e-8);
}

fn oracle_abs_deviation(q: &KumIwParams, center: f64) -> f64 {
    let below = common::integrate_interval(|t| (center - t) * common::pdf(q, t), 0.0, center);
    let above = common::integrate_positive_line(|u| u * common::pdf(q, center + u));
    below + above
}

#[test]
fn mean_deviations_match_two_piece_quadrature() {
    for q in [p(1.0, 1.0, 3.0), p(2.0, 1.5, 3.0), p(0.5, 3.0, 4.0), p(4.0, 0.5, 1.5)] {
        let mu = common::moment(&q, 1.0);
        let d1 = measures::mean_deviation_about_mean(&q, &cfg()).unwrap();
        assert_relative_eq!(d1, oracle_abs_deviation(&q, mu), max_relative = 1e-7);
        let median = q.quantile(0.5).unwrap();
        let d2 = measures::mean_deviation_about_median(&q, &cfg()).unwrap();
        assert_relative_eq!(d2, oracle_abs_deviation(&q, median), max_relative = 1e-7);
    }
}

#[test]
fn bonferroni_matches_quadrature() {
    let q = p(1.0, 1.0, 3.0);
    let quantile = q.quantile(0.5).unwrap();
    let partial = common::integrate_interval(|t| t * common::pdf(&q, t), 0.0, quantile);
    let expected = partial / (0.5 * common::moment(&q, 1.0));
    assert_relative_eq!(measures::bonferroni(&q, 0.5, &cfg()).unwrap(), expected, max_relative = 1e-8);
    assert_abs_diff_eq!(measures::lorenz(&p(2.0, 1.0, 3.0), 0.999, &cfg()).unwrap(), 1.0, epsilon = 1e-2);
}

#[test]
fn shannon_entropy_matches_quadrature() {
    let oracle = |q: &KumIwParams| {
        common::integrate_positive_line(|t| {
            let f = common::pdf(q, t);
            if f > 0.0 {
                -f * f.ln()
            } else {
                0.0
            }
        })
    };
    for q in [p(2.0, 1.5, 2.0), p(1.0, 1.0, 1.0), p(4.0, 3.0, 4.0), p(0.5, 0.5, 2.5)] {
        assert_abs_diff_eq!(measures::shannon_entropy(&q).unwrap(), oracle(&q), epsilon = 1e-8);
    }
    assert_abs_diff_eq!(
        measures::shannon_entropy(&p(1.0, 1.0, 1.0)).unwrap(),
        1.0 + 2.0 * specfun::EULER_MASCHERONI,
        epsilon = 1e-10
    );
    assert_abs_diff_eq!(measures::shannon_entropy(&p(1.0, 1.0, 1.0)).unwrap(), 2.154_431_3, epsilon = 1e-7);
}

#[test]
fn renyi_entropy_matches_quadrature() {
    for (q, rho) in [(p(2.0, 1.0, 2.0), 2.0), (p(0.5, 3.0, 1.5), 0.7), (p(4.0, 0.5, 4.0), 5.0)] {
        let integral = common::integrate_positive_line(|t| common::pdf(&q, t).powf(rho));
        let expected = integral.ln() / (1.0 - rho);
        assert_abs_diff_eq!(measures::renyi_entropy(&q, rho).unwrap(), expected, epsilon = 1e-9);
    }
}

fn oracle_order_pdf(q: &KumIwParams, r: usize, n: usize, t: f64) -> f64 {
    let coef = (common::ln_gamma(n as f64 + 1.0) - common::ln_gamma(r as f64) - common::ln_gamma((n - r) as f64 + 1.0)).exp();
    let f = common::cdf(q, t);
    coef * f.powi(r as i32 - 1) * (1.0 - f).powi((n - r) as i32) * common::pdf(q, t)
}

#[test]
fn order_statistics_match_quadrature() {
    let q = p(2.0, 1.0, 2.0);
    let total = common::integrate_positive_line(|t| measures::order_stat_pdf(&q, 2, 5, t).unwrap());
    assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
    for t in [0.4, 1.0, 3.0] {
        assert_relative_eq!(
            measures::order_stat_pdf(&q, 2, 5, t).unwrap(),
            oracle_order_pdf(&q, 2, 5, t),
            max_relative = 1e-10
        );
    }
    let q = p(2.0, 1.0, 3.0);
    let expected = common::integrate_positive_line(|t| t * oracle_order_pdf(&q, 3, 4, t));
    assert_relative_eq!(measures::order_stat_moment(&q, 3, 4, 1).unwrap(), expected, max_relative = 1e-8);
    assert_relative_eq!(
        measures::order_stat_moment_series(&q, 3, 4, 1, &cfg()).unwrap(),
        expected,
        max_relative = 1e-8
    );
}
