use std::f64::consts::{FRAC_PI_4, PI, SQRT_2, TAU};

use num_complex::Complex64;
use proptest::prelude::*;
use spinpath::analysis::{e_obs_from_counts, max_violation_settings, ChshSettings, SignConvention};
use spinpath::quantum::*;
use spinpath::Setting;

fn angle() -> impl Strategy<Value = f64> {
    -4.0 * PI..4.0 * PI
}

fn amplitude() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn random_state() -> impl Strategy<Value = JointState> {
    prop::array::uniform4(amplitude()).prop_filter_map("nonzero", |a| JointState::new(a).normalized())
}

#[test]
fn sinusoid_law_on_grid() {
    let psi = bell_state();
    let mut worst = 0.0f64;
    for i in 0..64 {
        for j in 0..64 {
            let (a, c) = (TAU * i as f64 / 64.0, TAU * j as f64 / 64.0);
            let e = expectation(&psi, Setting::new(a, c).unwrap()).unwrap();
            worst = worst.max((e - (a + c).cos()).abs());
        }
    }
    assert!(worst < 1e-12, "worst deviation {worst}");
}

#[test]
fn maximal_violation_value() {
    let psi = bell_state();
    let (s, terms) = max_violation_settings().evaluate(|st| expectation(&psi, st).unwrap());
    assert!((s - 2.0 * SQRT_2).abs() < 1e-12);
    assert!(terms.iter().all(|t| (t.abs() - SQRT_2 / 2.0).abs() < 1e-12));
}

#[test]
fn non_factorizable_witness() {
    let psi = bell_state();
    let e = expectation(&psi, Setting::new(FRAC_PI_4, FRAC_PI_4).unwrap()).unwrap();
    let product = FRAC_PI_4.cos() * FRAC_PI_4.cos();
    assert!(((e - product).abs() - 0.5).abs() < 1e-12);
    assert!(spin_marginal(&psi, FRAC_PI_4).unwrap().abs() < 1e-12);
    assert!(path_marginal(&psi, FRAC_PI_4).unwrap().abs() < 1e-12);
}

#[test]
fn best_settings_per_convention_reach_tsirelson_value() {
    let psi = bell_state();
    let grid: Vec<f64> = (0..8).map(|k| k as f64 * FRAC_PI_4).collect();
    for convention in SignConvention::ALL {
        let mut best = 0.0f64;
        for &a1 in &grid {
            for &a2 in &grid {
                for &c1 in &grid {
                    for &c2 in &grid {
                        let Ok(s) = ChshSettings::new(a1, a2, c1, c2) else {
                            continue;
                        };
                        let (v, _) = s.evaluate_with(convention, |st| expectation(&psi, st).unwrap());
                        best = best.max(v.abs());
                    }
                }
            }
        }
        assert!((best - 2.0 * SQRT_2).abs() < 1e-12, "convention {convention:?}: {best}");
    }
}

#[test]
fn mixed_state_scales_with_visibility() {
    let psi = bell_state();
    for v in [0.0, 0.25, 0.5, 0.707, 0.73, 1.0] {
        let rho = dephase_path(&psi, v).unwrap();
        rho.validate().unwrap();
        for k in 0..16 {
            let st = Setting::new(0.37 * k as f64, 1.1 - 0.23 * k as f64).unwrap();
            let e = expectation_mixed(&rho, st).unwrap();
            assert!((e - v * expectation(&psi, st).unwrap()).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn probabilities_sum_to_one(psi in random_state(), a in angle(), c in angle()) {
        let st = Setting::new(a, c).unwrap();
        let mut total = 0.0;
        for s in Sign::BOTH {
            for p in Sign::BOTH {
                let prob = joint_probability(&psi, st, s, p).unwrap();
                prop_assert!(prob >= -1e-15);
                total += prob;
            }
        }
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projector_identities(a in angle(), c in angle()) {
        let id = Operator4::identity();
        for sign in Sign::BOTH {
            let ps = spin_projector(a, sign).unwrap();
            let pp = path_projector(c, sign).unwrap();
            prop_assert!(ps.is_idempotent(1e-14));
            prop_assert!(pp.is_idempotent(1e-14));
            prop_assert!(ps.is_hermitian(1e-14));
            prop_assert!(pp.is_hermitian(1e-14));
        }
        let sum_s = spin_projector(a, Sign::Plus).unwrap() + spin_projector(a, Sign::Minus).unwrap();
        let sum_p = path_projector(c, Sign::Plus).unwrap() + path_projector(c, Sign::Minus).unwrap();
        prop_assert!(sum_s.max_abs_diff(&id) < 1e-14);
        prop_assert!(sum_p.max_abs_diff(&id) < 1e-14);
        let shifted_s = spin_projector(a + PI, Sign::Plus).unwrap();
        let shifted_p = path_projector(c + PI, Sign::Plus).unwrap();
        prop_assert!(shifted_s.max_abs_diff(&spin_projector(a, Sign::Minus).unwrap()) < 1e-14);
        prop_assert!(shifted_p.max_abs_diff(&path_projector(c, Sign::Minus).unwrap()) < 1e-14);
    }

    #[test]
    fn spin_and_path_commute(a in angle(), c in angle()) {
        for s in Sign::BOTH {
            for p in Sign::BOTH {
                let comm = spin_projector(a, s).unwrap().commutator(&path_projector(c, p).unwrap());
                prop_assert!(comm.max_abs() < 1e-14);
            }
        }
    }

    #[test]
    fn expectation_is_two_pi_periodic(a in angle(), c in angle(), m in -3i32..3, n in -3i32..3) {
        let psi = bell_state();
        let e0 = expectation(&psi, Setting::new(a, c).unwrap()).unwrap();
        let e1 = expectation(&psi, Setting::new(a + TAU * m as f64, c + TAU * n as f64).unwrap()).unwrap();
        prop_assert!((e0 - e1).abs() < 1e-12);
    }

    #[test]
    fn marginals_are_neutral(a in angle(), c in angle()) {
        let psi = bell_state();
        prop_assert!(spin_marginal(&psi, a).unwrap().abs() < 1e-12);
        prop_assert!(path_marginal(&psi, c).unwrap().abs() < 1e-12);
    }

    #[test]
    fn count_ratio_reproduces_expectation(a in angle(), c in angle()) {
        let psi = bell_state();
        let p = |da: f64, dc: f64| joint_probability(&psi, Setting::new(a + da, c + dc).unwrap(), Sign::Plus, Sign::Plus).unwrap();
        let st = Setting::new(a, c).unwrap();
        let e = e_obs_from_counts(st, p(0.0, 0.0), p(PI, PI), p(0.0, PI), p(PI, 0.0)).unwrap();
        prop_assert!((e.value - expectation(&psi, st).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn separable_states_obey_classical_bound(
        spin in prop::array::uniform2(amplitude()),
        path in prop::array::uniform2(amplitude()),
        a1 in angle(), a2 in angle(), c1 in angle(), c2 in angle(),
    ) {
        let Some(psi) = JointState::product(spin, path).normalized() else { return Ok(()) };
        let Ok(settings) = ChshSettings::new(a1, a2, c1, c2) else { return Ok(()) };
        for convention in SignConvention::ALL {
            let (s, _) = settings.evaluate_with(convention, |st| expectation(&psi, st).unwrap());
            prop_assert!(s.abs() <= 2.0 + 1e-9, "S = {}", s);
        }
    }

    #[test]
    fn dephased_state_stays_physical(v in 0.0f64..=1.0, a in angle(), c in angle()) {
        let rho = dephase_path(&bell_state(), v).unwrap();
        prop_assert!(rho.validate().is_ok());
        let e = expectation_mixed(&rho, Setting::new(a, c).unwrap()).unwrap();
        prop_assert!((e - v * (a + c).cos()).abs() < 1e-12);
    }
}
