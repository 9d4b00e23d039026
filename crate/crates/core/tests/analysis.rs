use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};

use proptest::prelude::*;
use spinpath::analysis::*;
use spinpath::apparatus::{default_alphas, paper_apparatus, uniform_chi_grid, ApparatusModel, ScanPlan};
use spinpath::montecarlo::{sample_full_experiment, sample_scan};
use spinpath::setting::angular_distance;
use spinpath::{Error, Setting};

fn noiseless_fit(model: &ApparatusModel, alpha: f64, points: usize) -> FitResult {
    let pts: Vec<(f64, f64)> = uniform_chi_grid(points)
        .into_iter()
        .map(|chi| (chi, model.predicted_rate(Setting::new(alpha, chi).unwrap())))
        .collect();
    let mut fit = fit_points(&pts).unwrap();
    fit.alpha = Some(alpha);
    fit
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fit_round_trip(a in 1.0f64..1e5, v in 0.01f64..0.999, phi in 0.0f64..TAU, n in 4usize..64) {
        let pts: Vec<(f64, f64)> = uniform_chi_grid(n).into_iter().map(|x| (x, a * (1.0 + v * (x + phi).cos()))).collect();
        let fit = fit_points(&pts).unwrap();
        prop_assert!((fit.amplitude - a).abs() <= 1e-9 * a);
        prop_assert!((fit.visibility - v).abs() <= 1e-9);
        prop_assert!(angular_distance(fit.phase, phi) <= 1e-9);
    }

    #[test]
    fn fitted_correlation_matches_model(v in 0.0f64..=1.0, offset in -3.0f64..3.0, alpha in 0.0f64..TAU, chi in -6.0f64..6.0) {
        let model = ApparatusModel::new(1000.0, v, offset).unwrap();
        let fa = noiseless_fit(&model, alpha, 16);
        let fb = noiseless_fit(&model, alpha + PI, 16);
        let e = e_obs_from_fits(&fa, &fb, chi).unwrap();
        let expected = model.ideal_expectation(Setting::new(alpha, chi).unwrap());
        prop_assert!((e.value - expected).abs() < 1e-9, "{} vs {}", e.value, expected);
    }

    #[test]
    fn sign_conventions_are_symmetric(t in prop::array::uniform4(-1.0f64..1.0)) {
        for c in SignConvention::ALL {
            let signs = c.signs();
            prop_assert_eq!(signs.iter().filter(|s| **s < 0.0).count(), 1);
            prop_assert!((chsh_combination(t, c) - t.iter().zip(signs).map(|(x, s)| x * s).sum::<f64>()).abs() < 1e-15);
        }
    }
}

#[test]
fn visibility_pulls_are_standard_normal() {
    let plan = ScanPlan::new(0.0, uniform_chi_grid(32), 16).unwrap();
    let pulls: Vec<f64> = (0..200u64)
        .map(|seed| {
            let fit = fit_sinusoid(&sample_scan(&paper_apparatus(), &plan, 1000 + seed).unwrap()).unwrap();
            (fit.visibility - 0.76) / fit.sigma_visibility()
        })
        .collect();
    let n = pulls.len() as f64;
    let mean = pulls.iter().sum::<f64>() / n;
    let var = pulls.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / (n - 1.0);
    assert!(mean.abs() < 0.15, "pull mean {mean}");
    assert!((0.8..=1.2).contains(&var), "pull variance {var}");
}

#[test]
fn count_and_bootstrap_errors_agree() {
    for counts in [
        [520.0, 480.0, 130.0, 170.0],
        [50.0, 50.0, 50.0, 50.0],
        [900.0, 10.0, 40.0, 60.0],
    ] {
        let st = Setting::new(0.0, 0.0).unwrap();
        let delta = e_obs_from_counts(st, counts[0], counts[1], counts[2], counts[3])
            .unwrap()
            .sigma;
        let boot = bootstrap_counts_sigma(counts, 20_000, 4).unwrap();
        assert!((boot / delta - 1.0).abs() < 0.1, "bootstrap {boot} vs delta {delta}");
    }
}

#[test]
fn fit_and_bootstrap_errors_agree() {
    let scans = sample_full_experiment(&paper_apparatus(), &[0.0, PI], &uniform_chi_grid(32), 1, 99).unwrap();
    let (fa, fb) = (fit_sinusoid(&scans[0]).unwrap(), fit_sinusoid(&scans[1]).unwrap());
    let chi = 0.79 * PI;
    let delta = e_obs_from_fits(&fa, &fb, chi).unwrap().sigma;
    let boot = bootstrap_fits_sigma(&scans[0], &scans[1], chi, 2000, 5).unwrap();
    assert!((boot / delta - 1.0).abs() < 0.1, "bootstrap {boot} vs delta {delta}");
}

#[test]
fn threshold_and_scaling() {
    assert!((visibility_threshold() - SQRT_2 / 2.0).abs() < 1e-15);
    assert!((s_of_visibility(visibility_threshold()) - 2.0).abs() < 1e-9);
    assert!((s_of_visibility(1.0) - 2.0 * SQRT_2).abs() < 1e-12);
    assert!((s_of_visibility(0.73) - 2.0648).abs() < 1e-4);
}

#[test]
fn reference_correlations_with_their_own_convention() {
    let st = Setting::new(0.0, 0.0).unwrap();
    let e = |v| ExpectationEstimate::new(v, 0.01, st).unwrap();
    let r = s_prime(e(0.542), e(0.4882), e(-0.538), e(0.438), SignConvention::NEGATE_A2_X1);
    assert!((r.s_value - 2.0062).abs() < 1e-12);
    assert!(r.violated);
    assert!((r.sigma - 0.02).abs() < 1e-12);
}

#[test]
fn below_threshold_is_not_violated() {
    let model = ApparatusModel::new(1e5, 0.5, 0.0).unwrap();
    let scans = sample_full_experiment(&model, &default_alphas(), &uniform_chi_grid(32), 1, 17).unwrap();
    let fits: Vec<_> = scans.iter().map(|s| fit_sinusoid(s).unwrap()).collect();
    let r = chsh_from_fits(&fits, &max_violation_settings(), SignConvention::default()).unwrap();
    assert!(!r.violated);
    assert!((r.s_value - 2.0 * SQRT_2 * 0.5).abs() < 0.01);
}

#[test]
fn missing_angles_are_listed() {
    let scans = sample_full_experiment(&paper_apparatus(), &[0.0, PI], &uniform_chi_grid(8), 2, 1).unwrap();
    let settings = ChshSettings::new(FRAC_PI_2, 0.0, 0.79 * PI, 1.29 * PI).unwrap();
    match chsh_from_repetitions(&scans, &settings, SignConvention::default()) {
        Err(Error::Domain(msg)) => assert!(msg.contains("1.570796") && msg.contains("4.712389"), "{msg}"),
        other => panic!("expected a domain error, got {other:?}"),
    }
}

#[test]
fn reference_run_is_stable_across_seeds() {
    let settings = ChshSettings::new(FRAC_PI_2, 0.0, 0.79 * PI, 1.29 * PI).unwrap();
    let mut values = Vec::new();
    for seed in 0..5 {
        let scans =
            sample_full_experiment(&paper_apparatus(), &default_alphas(), &uniform_chi_grid(32), 16, seed).unwrap();
        let r = chsh_from_repetitions(&scans, &settings, SignConvention::default()).unwrap();
        assert!((0.01..=0.04).contains(&r.sigma_statistical()));
        values.push(r.chsh.s_value);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    assert!((mean - s_of_visibility(0.73)).abs() < 0.03, "mean S' {mean}");
}
