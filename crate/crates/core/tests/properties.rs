mod common;

use kumiw::bayes::{full_conditional_log, log_posterior, uncensored_log_kernel, GammaPrior, Param, PriorSpec};
use kumiw::measures::{self, SeriesConfig};
use kumiw::mle::censored_loglik;
use kumiw::survdata::{kaplan_meier, simulate_censored};
use kumiw::{CensoredDataset, KumIwParams};
use proptest::prelude::*;
use proptest::strategy::ValueTree;

fn params() -> impl Strategy<Value = KumIwParams> {
    (0.3f64..6.0, 0.2f64..5.0, 0.5f64..6.0).prop_map(|(b, c, beta)| KumIwParams::new(b, c, beta).unwrap())
}

fn cfg() -> SeriesConfig {
    SeriesConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn density_integrates_to_one(p in params()) {
        let total = common::integrate_positive_line(|t| p.pdf(t).unwrap());
        prop_assert!((total - 1.0).abs() <= 1e-8, "{p}: {total}");
    }

    #[test]
    fn cdf_is_monotone_and_pdf_is_its_derivative(p in params(), r in 0.05f64..0.95) {
        let t = p.quantile(r).unwrap();
        let h = 1e-6 * t;
        let deriv = (p.cdf(t + h).unwrap() - p.cdf(t - h).unwrap()) / (2.0 * h);
        let f = p.pdf(t).unwrap();
        prop_assert!((deriv - f).abs() <= 1e-5 * f, "{p} at {t}: {deriv} vs {f}");
        prop_assert!(p.cdf(t * 1.01).unwrap() >= p.cdf(t).unwrap());
    }

    #[test]
    fn quantile_inverts_cdf(p in params(), u in 0.001f64..0.999) {
        let t = p.quantile(u).unwrap();
        prop_assert!((p.cdf(t).unwrap() - u).abs() <= 1e-10);
        let back = p.quantile(p.cdf(t).unwrap()).unwrap();
        prop_assert!((back - t).abs() <= 1e-9 * t);
    }

    #[test]
    fn survival_and_cdf_are_complementary(p in params(), t in 0.01f64..50.0) {
        prop_assert!((p.survival(t).unwrap() + p.cdf(t).unwrap() - 1.0).abs() <= 1e-14);
        let h = p.hazard(t).unwrap();
        let ratio = p.pdf(t).unwrap() / p.survival(t).unwrap();
        if ratio.is_finite() && ratio > 1e-300 {
            prop_assert!((h - ratio).abs() <= 1e-10 * ratio);
        }
    }

    #[test]
    fn second_moment_dominates_squared_mean(p in params()) {
        prop_assume!(p.b() * p.beta() > 2.0);
        let m1 = measures::moment(&p, 1, &cfg()).unwrap();
        let m2 = measures::moment(&p, 2, &cfg()).unwrap();
        prop_assert!(m2 >= m1 * m1);
    }

    #[test]
    fn lorenz_lies_below_diagonal(p in params(), prob in 0.01f64..0.99) {
        prop_assume!(p.b() * p.beta() > 1.05);
        let row = measures::inequality_curves(&p, &[prob], &cfg()).unwrap()[0];
        prop_assert!(row.lorenz <= prob);
        prop_assert_eq!(row.lorenz, prob * row.bonferroni);
    }

    #[test]
    fn order_statistic_densities_average_to_parent(p in params(), n in 1usize..8, u in 0.05f64..0.95) {
        let t = p.quantile(u).unwrap();
        let avg: f64 = (1..=n).map(|r| measures::order_stat_pdf(&p, r, n, t).unwrap()).sum::<f64>() / n as f64;
        let f = p.pdf(t).unwrap();
        prop_assert!((avg - f).abs() <= 1e-8 * f);
    }

    #[test]
    fn entropy_shifts_by_log_scale(b in 0.3f64..6.0, beta in 0.5f64..6.0, c in 0.1f64..20.0) {
        let scaled = measures::shannon_entropy(&KumIwParams::new(b, c, beta).unwrap()).unwrap();
        let unit = measures::shannon_entropy(&KumIwParams::new(b, 1.0, beta).unwrap()).unwrap();
        prop_assert!((scaled - unit - c.ln()).abs() <= 1e-7);
    }

    #[test]
    fn renyi_entropy_is_nonincreasing(p in params()) {
        prop_assume!(0.5 * (p.b() + 1.0 / p.beta()) > 1.0 / p.beta());
        let i05 = measures::renyi_entropy(&p, 0.5).unwrap();
        let i2 = measures::renyi_entropy(&p, 2.0).unwrap();
        let i5 = measures::renyi_entropy(&p, 5.0).unwrap();
        prop_assert!(i05 >= i2 && i2 >= i5);
    }

    #[test]
    fn kaplan_meier_ignores_row_order(seed in 0u64..1000) {
        let p = KumIwParams::new(2.0, 1.5, 3.0).unwrap();
        let d = simulate_censored(&p, 40, 0.3, seed).unwrap();
        let mut obs = d.observations().to_vec();
        obs.reverse();
        obs.rotate_left(7);
        let shuffled = CensoredDataset::new("s", obs).unwrap();
        prop_assert_eq!(kaplan_meier(&d).unwrap(), kaplan_meier(&shuffled).unwrap());
        prop_assert!((censored_loglik(&p, &d) - censored_loglik(&p, &shuffled)).abs() <= 1e-10);
    }

    #[test]
    fn early_censoring_leaves_curve_unchanged(seed in 0u64..1000) {
        let p = KumIwParams::new(1.5, 1.0, 2.0).unwrap();
        let d = simulate_censored(&p, 30, 0.2, seed).unwrap();
        let km = kaplan_meier(&d).unwrap();
        let mut obs = d.observations().to_vec();
        let first_event = d.event_times().fold(f64::INFINITY, f64::min);
        obs.push(kumiw::CensoredObs::censored(first_event * 0.5).unwrap());
        let extended = kaplan_meier(&CensoredDataset::new("e", obs).unwrap()).unwrap();
        prop_assert_eq!(km.times, extended.times);
        prop_assert_eq!(km.survival, extended.survival);
    }

    #[test]
    fn late_censoring_only_enlarges_risk_sets(seed in 0u64..1000) {
        let p = KumIwParams::new(1.5, 1.0, 2.0).unwrap();
        let d = simulate_censored(&p, 30, 0.2, seed).unwrap();
        let km = kaplan_meier(&d).unwrap();
        let mut obs = d.observations().to_vec();
        let last = d.times().into_iter().fold(0.0, f64::max);
        obs.push(kumiw::CensoredObs::censored(last * 2.0).unwrap());
        let extended = kaplan_meier(&CensoredDataset::new("e", obs).unwrap()).unwrap();
        prop_assert_eq!(&km.times, &extended.times);
        prop_assert_eq!(&km.events, &extended.events);
        for (a, b) in km.at_risk.iter().zip(&extended.at_risk) {
            prop_assert_eq!(a + 1, *b);
        }
        for (a, b) in km.survival.iter().zip(&extended.survival) {
            prop_assert!(b >= a);
        }
    }

    #[test]
    fn km_without_censoring_is_empirical_survival(seed in 0u64..1000) {
        let p = KumIwParams::new(2.0, 1.0, 2.5).unwrap();
        let d = simulate_censored(&p, 50, 0.0, seed).unwrap();
        let km = kaplan_meier(&d).unwrap();
        let times = d.times();
        for (t, s) in km.times.iter().zip(&km.survival) {
            let ecdf = times.iter().filter(|x| *x <= t).count() as f64 / times.len() as f64;
            prop_assert!((s - (1.0 - ecdf)).abs() <= 1e-12);
        }
    }
}

fn uncensored_sample() -> CensoredDataset {
    simulate_censored(&KumIwParams::new(2.0, 1.5, 3.0).unwrap(), 60, 0.0, 9).unwrap()
}

fn prior() -> PriorSpec {
    PriorSpec {
        b: GammaPrior::new(1.5, 0.2).unwrap(),
        c: GammaPrior::new(2.0, 0.5).unwrap(),
        beta: GammaPrior::new(0.8, 0.1).unwrap(),
    }
}

#[test]
fn printed_posterior_kernel_is_proportional() {
    let d = uncensored_sample();
    let pr = prior();
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let mut diffs = Vec::new();
    for _ in 0..50 {
        let p = params().new_tree(&mut runner).unwrap().current();
        let ll: f64 = d.times().iter().map(|t| p.log_pdf(*t).unwrap()).sum();
        let logprior = pr.log_density(&p);
        diffs.push(log_posterior(&p, &d, &pr) - ll - logprior);
        let kernel = uncensored_log_kernel(&p, &d, &pr).unwrap();
        diffs.push(log_posterior(&p, &d, &pr) - kernel);
    }
    let base_direct = diffs[0];
    let base_kernel = diffs[1];
    for pair in diffs.chunks(2) {
        assert!((pair[0] - base_direct).abs() <= 1e-9, "{} vs {base_direct}", pair[0]);
        assert!((pair[1] - base_kernel).abs() <= 1e-9 * base_kernel.abs().max(1.0), "{} vs {base_kernel}", pair[1]);
    }
}

#[test]
fn full_conditionals_track_joint_posterior() {
    let truth = KumIwParams::new(2.0, 1.5, 3.0).unwrap();
    let d = simulate_censored(&truth, 80, 0.25, 4).unwrap();
    let pr = prior();
    let at = KumIwParams::new(1.7, 1.4, 2.6).unwrap();
    for which in Param::ALL {
        let center = which.get(&at);
        let gaps: Vec<f64> = (0..20)
            .map(|i| {
                let v = center * (0.5 + 0.05 * i as f64);
                let q = which.with(&at, v).unwrap();
                full_conditional_log(which, v, &at, &d, &pr).unwrap() - log_posterior(&q, &d, &pr)
            })
            .collect();
        for g in &gaps {
            assert!((g - gaps[0]).abs() <= 1e-9, "{}: {g} vs {}", which.name(), gaps[0]);
        }
    }
    let b1 = full_conditional_log(Param::B, 1.0, &at, &d, &pr).unwrap();
    let b2 = full_conditional_log(Param::B, 2.0, &at, &d, &pr).unwrap();
    let j1 = log_posterior(&Param::B.with(&at, 1.0).unwrap(), &d, &pr);
    let j2 = log_posterior(&Param::B.with(&at, 2.0).unwrap(), &d, &pr);
    assert!(((b2 - b1) - (j2 - j1)).abs() <= 1e-9);
}
