use proptest::prelude::*;
use pseudobo::acquisition::{ei, normal_cdf, pi, ucb};
use pseudobo::calibration::{calibrate_lambda, coverage, winsorize, IntervalSample};

fn argmax_set(v: &[f64]) -> Vec<usize> {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..v.len()).filter(|&i| v[i] == m).collect()
}

proptest! {
    #[test]
    fn ei_is_nonnegative(p in -50.0f64..50.0, sigma in 0.0f64..20.0, tau in 0.0f64..5.0) {
        prop_assert!(ei(p, sigma, tau) >= 0.0);
    }

    #[test]
    fn ei_is_monotone_in_p(a in -10.0f64..10.0, b in -10.0f64..10.0, sigma in 1e-3f64..10.0, tau in 0.0f64..2.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(ei(lo, sigma, tau) <= ei(hi, sigma, tau));
    }

    #[test]
    fn ei_slope_is_the_normal_cdf(p in -4.0f64..4.0, sigma in 0.05f64..4.0, tau in 0.0f64..1.0) {
        let h = 1e-5;
        let fd = (ei(p + h, sigma, tau) - ei(p - h, sigma, tau)) / (2.0 * h);
        prop_assert!((fd - normal_cdf((p - tau) / sigma)).abs() <= 1e-5);
    }

    #[test]
    fn pi_is_a_probability(p in -50.0f64..50.0, sigma in 0.0f64..20.0, tau in 0.0f64..5.0) {
        let v = pi(p, sigma, tau);
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn ucb_ranks_like_mean_plus_scaled_spread(
        cells in prop::collection::vec((-64i32..64, 0i32..32), 1..40),
        beta_exp in -3i32..4,
        incumbent in -16i32..16,
        tau in 0i32..8,
    ) {
        let beta = 2f64.powi(beta_exp);
        let f: Vec<f64> = cells.iter().map(|c| c.0 as f64 / 8.0).collect();
        let s: Vec<f64> = cells.iter().map(|c| c.1 as f64 / 8.0).collect();
        let (inc, tau) = (incumbent as f64 / 8.0, tau as f64 / 64.0);
        let plain: Vec<f64> = f.iter().zip(&s).map(|(f, s)| f + beta * s).collect();
        let rewritten: Vec<f64> = f.iter().zip(&s).map(|(f, s)| ucb(f - inc, *s, tau, beta)).collect();
        prop_assert_eq!(argmax_set(&plain), argmax_set(&rewritten));
    }

    #[test]
    fn lambda_matches_closed_form(
        pairs in prop::collection::vec((0.0f64..10.0, 1e-3f64..5.0), 1..50),
    ) {
        let samples: Vec<IntervalSample> = pairs.iter().map(|&(r, s)| IntervalSample { residual: r, sigma: s }).collect();
        let oracle = pairs.iter().map(|(r, s)| r / s).fold(0.0, f64::max);
        let lambda = calibrate_lambda(&samples, 1e-6).unwrap();
        prop_assert!((lambda - oracle).abs() <= 1e-6, "{} vs {}", lambda, oracle);
        prop_assert_eq!(coverage(&samples, lambda), 1.0);
    }

    #[test]
    fn coverage_grows_with_lambda(
        pairs in prop::collection::vec((0.0f64..10.0, 0.0f64..5.0), 1..50),
        a in 0.0f64..20.0,
        b in 0.0f64..20.0,
    ) {
        let samples: Vec<IntervalSample> = pairs.iter().map(|&(r, s)| IntervalSample { residual: r, sigma: s }).collect();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (clo, chi) = (coverage(&samples, lo), coverage(&samples, hi));
        prop_assert!(clo <= chi && (0.0..=1.0).contains(&chi));
    }

    #[test]
    fn winsorize_is_idempotent(values in prop::collection::vec(-1e3f64..1e3, 1..40), k in 5.0f64..20.0) {
        let once = winsorize(&values, k);
        prop_assert_eq!(winsorize(&once, k), once);
    }
}
