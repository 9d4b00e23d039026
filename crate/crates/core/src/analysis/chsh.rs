//! Correlation estimates from four count rates and the CHSH combination.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::fit::{basis, quad_form, FitResult};
use crate::error::{domain, Error, Result};
use crate::montecarlo::ScanResult;
use crate::poisson::sample_poisson;
use crate::setting::{angular_distance, Setting};

/// Settings compared by [`weighted_average`] must agree this closely (radians).
pub const SETTING_MATCH_TOLERANCE: f64 = 1e-9;

/// Estimated joint expectation at one setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationEstimate {
    pub value: f64,
    pub sigma: f64,
    pub setting: Setting,
    /// Set when the propagated variance came out negative and was clamped to 0.
    pub variance_clamped: bool,
}

impl ExpectationEstimate {
    pub fn new(value: f64, sigma: f64, setting: Setting) -> Result<Self> {
        if !(sigma >= 0.0) {
            return Err(domain!("sigma must be non-negative, got {sigma}"));
        }
        Ok(Self {
            value,
            sigma,
            setting,
            variance_clamped: false,
        })
    }
}

/// Ratio `(N++ + N−− − N+− − N−+)/(N++ + N−− + N+− + N−+)` with Poisson error.
///
/// Each count is treated as an independent Poisson variable, so its variance
/// is the count itself.
pub fn e_obs_from_counts(setting: Setting, n_pp: f64, n_mm: f64, n_pm: f64, n_mp: f64) -> Result<ExpectationEstimate> {
    let counts = [n_pp, n_mm, n_pm, n_mp];
    if let Some(x) = counts.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(domain!("counts must be finite and non-negative, got {x}"));
    }
    let (value, grad) = ratio_and_gradient(counts)?;
    let var: f64 = grad.iter().zip(counts.iter()).map(|(g, n)| g * g * n).sum();
    Ok(ExpectationEstimate {
        value,
        sigma: libm::sqrt(var),
        setting,
        variance_clamped: false,
    })
}

const RATIO_SIGNS: [f64; 4] = [1.0, 1.0, -1.0, -1.0];

fn ratio_and_gradient(counts: [f64; 4]) -> Result<(f64, [f64; 4])> {
    let total: f64 = counts.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DivisionByZero);
    }
    let diff: f64 = counts.iter().zip(RATIO_SIGNS).map(|(n, s)| s * n).sum();
    let mut grad = [0.0; 4];
    for (g, s) in grad.iter_mut().zip(RATIO_SIGNS) {
        *g = (s * total - diff) / (total * total);
    }
    Ok((diff / total, grad))
}

/// Correlation at `chi` from fitted curves at spin rotations `α` and `α + π`.
///
/// The four inputs are `f_α(χ)`, `f_{α+π}(χ+π)`, `f_α(χ+π)` and `f_{α+π}(χ)`;
/// the error is propagated from both fits' linear covariances.
pub fn e_obs_from_fits(fit_a: &FitResult, fit_a_pi: &FitResult, chi: f64) -> Result<ExpectationEstimate> {
    if let (Some(a), Some(b)) = (fit_a.alpha, fit_a_pi.alpha) {
        if angular_distance(a + PI, b) > SETTING_MATCH_TOLERANCE {
            return Err(domain!("second fit must be at alpha + pi (got {a} and {b})"));
        }
    }
    let setting = Setting::new(fit_a.alpha.unwrap_or(0.0), chi)?;
    let chi_pi = chi + PI;
    let counts = [
        fit_a.model(chi),
        fit_a_pi.model(chi_pi),
        fit_a.model(chi_pi),
        fit_a_pi.model(chi),
    ];
    let (value, grad) = ratio_and_gradient(counts)?;

    let (g_chi, g_chi_pi) = (basis(chi), basis(chi_pi));
    let mut grad_a = [0.0; 3];
    let mut grad_b = [0.0; 3];
    for k in 0..3 {
        grad_a[k] = grad[0] * g_chi[k] + grad[2] * g_chi_pi[k];
        grad_b[k] = grad[1] * g_chi_pi[k] + grad[3] * g_chi[k];
    }
    let var = quad_form(&fit_a.linear_covariance, &grad_a, &grad_a)
        + quad_form(&fit_a_pi.linear_covariance, &grad_b, &grad_b);
    let clamped = !(var >= 0.0);
    Ok(ExpectationEstimate {
        value,
        sigma: if clamped { 0.0 } else { libm::sqrt(var) },
        setting,
        variance_clamped: clamped,
    })
}

/// Inverse-variance weighted mean of estimates taken at the same setting.
pub fn weighted_average(estimates: &[ExpectationEstimate]) -> Result<ExpectationEstimate> {
    let first = estimates
        .first()
        .ok_or_else(|| domain!("weighted average of an empty list"))?;
    let mut wsum = 0.0;
    let mut wx = 0.0;
    let mut clamped = false;
    for e in estimates {
        if !e.setting.approx_eq(&first.setting, SETTING_MATCH_TOLERANCE) {
            return Err(domain!("cannot average estimates at different settings"));
        }
        if !(e.sigma > 0.0) {
            return Err(domain!("weighted average needs positive sigmas, got {}", e.sigma));
        }
        let w = 1.0 / (e.sigma * e.sigma);
        wsum += w;
        wx += w * e.value;
        clamped |= e.variance_clamped;
    }
    if estimates.len() == 1 {
        return Ok(*first);
    }
    Ok(ExpectationEstimate {
        value: wx / wsum,
        sigma: 1.0 / libm::sqrt(wsum),
        setting: first.setting,
        variance_clamped: clamped,
    })
}

/// Which of the four CHSH terms carries the minus sign.
///
/// Terms are ordered `(α₁,χ₁), (α₁,χ₂), (α₂,χ₁), (α₂,χ₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignConvention(u8);

impl SignConvention {
    /// Minus on `(α₁, χ₂)`.
    pub const NEGATE_A1_X2: SignConvention = SignConvention(1);
    /// Minus on `(α₂, χ₁)`.
    pub const NEGATE_A2_X1: SignConvention = SignConvention(2);

    pub const ALL: [SignConvention; 4] = [
        SignConvention(0),
        SignConvention(1),
        SignConvention(2),
        SignConvention(3),
    ];

    pub fn new(index: u8) -> Result<Self> {
        if index < 4 {
            Ok(Self(index))
        } else {
            Err(domain!("sign convention index must be 0..=3, got {index}"))
        }
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn signs(self) -> [f64; 4] {
        let mut s = [1.0; 4];
        s[self.0 as usize] = -1.0;
        s
    }
}

impl Default for SignConvention {
    fn default() -> Self {
        Self::NEGATE_A1_X2
    }
}

/// Signed sum of four correlations.
pub fn chsh_combination(terms: [f64; 4], convention: SignConvention) -> f64 {
    terms.iter().zip(convention.signs()).map(|(e, s)| s * e).sum()
}

/// Two spin-rotation angles and two phase shifts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshSettings {
    alpha1: f64,
    alpha2: f64,
    chi1: f64,
    chi2: f64,
}

impl ChshSettings {
    pub fn new(alpha1: f64, alpha2: f64, chi1: f64, chi2: f64) -> Result<Self> {
        if ![alpha1, alpha2, chi1, chi2].iter().all(|x| x.is_finite()) {
            return Err(domain!("CHSH angles must be finite"));
        }
        Ok(Self {
            alpha1,
            alpha2,
            chi1,
            chi2,
        })
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }
    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }
    pub fn chi1(&self) -> f64 {
        self.chi1
    }
    pub fn chi2(&self) -> f64 {
        self.chi2
    }

    pub fn alphas(&self) -> [f64; 2] {
        [self.alpha1, self.alpha2]
    }

    pub fn chis(&self) -> [f64; 2] {
        [self.chi1, self.chi2]
    }

    /// The four measurement contexts in term order.
    pub fn terms(&self) -> [Setting; 4] {
        let s = |a, x| Setting::new(a, x).expect("finite angles");
        [
            s(self.alpha1, self.chi1),
            s(self.alpha1, self.chi2),
            s(self.alpha2, self.chi1),
            s(self.alpha2, self.chi2),
        ]
    }

    /// CHSH value of the correlation function `e` under the default convention.
    pub fn evaluate(&self, e: impl Fn(Setting) -> f64) -> (f64, [f64; 4]) {
        self.evaluate_with(SignConvention::default(), e)
    }

    pub fn evaluate_with(&self, convention: SignConvention, e: impl Fn(Setting) -> f64) -> (f64, [f64; 4]) {
        let t = self.terms().map(e);
        (chsh_combination(t, convention), t)
    }
}

/// `α₁ = π/2, α₂ = 0, χ₁ = −π/4, χ₂ = π/4`.
pub fn max_violation_settings() -> ChshSettings {
    ChshSettings {
        alpha1: FRAC_PI_2,
        alpha2: 0.0,
        chi1: -FRAC_PI_4,
        chi2: FRAC_PI_4,
    }
}

/// Minimum contrast for which a sinusoidal correlation can exceed the classical bound.
pub fn visibility_threshold() -> f64 {
    FRAC_1_SQRT_2
}

/// Largest CHSH value reachable by `V·cos(α + χ)`.
pub fn s_of_visibility(visibility: f64) -> f64 {
    2.0 * SQRT_2 * visibility
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChshResult {
    pub s_value: f64,
    pub sigma: f64,
    pub terms: [ExpectationEstimate; 4],
    pub sign_convention: SignConvention,
    pub violated: bool,
}

impl ChshResult {
    /// Distance of `|S′|` above 2 in units of sigma (infinite for zero sigma).
    pub fn significance(&self) -> f64 {
        (self.s_value.abs() - 2.0) / self.sigma
    }
}

/// Signed sum of four estimates, errors added in quadrature.
pub fn s_prime(
    e11: ExpectationEstimate,
    e12: ExpectationEstimate,
    e21: ExpectationEstimate,
    e22: ExpectationEstimate,
    convention: SignConvention,
) -> ChshResult {
    let terms = [e11, e12, e21, e22];
    let s_value = chsh_combination(terms.map(|t| t.value), convention);
    let sigma = libm::sqrt(terms.iter().map(|t| t.sigma * t.sigma).sum());
    ChshResult {
        s_value,
        sigma,
        terms,
        sign_convention: convention,
        violated: s_value.abs() > 2.0,
    }
}

fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    libm::sqrt(xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0))
}

/// Parametric bootstrap of the count-ratio estimator: each count is redrawn as
/// Poisson with mean equal to the observed count.
pub fn bootstrap_counts_sigma(counts: [f64; 4], resamples: usize, seed: u64) -> Result<f64> {
    if resamples < 2 {
        return Err(domain!("bootstrap needs at least 2 resamples"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let draw = counts.map(|n| sample_poisson(&mut rng, n) as f64);
        if let Ok((v, _)) = ratio_and_gradient(draw) {
            values.push(v);
        }
    }
    Ok(sample_std(&values))
}

/// Parametric bootstrap of [`e_obs_from_fits`]: every scan point is redrawn as
/// Poisson around its observed count, both scans are refitted, and the spread
/// of the resulting correlation is returned.
pub fn bootstrap_fits_sigma(
    scan_a: &ScanResult,
    scan_a_pi: &ScanResult,
    chi: f64,
    resamples: usize,
    seed: u64,
) -> Result<f64> {
    if resamples < 2 {
        return Err(domain!("bootstrap needs at least 2 resamples"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(resamples);
    let redraw = |scan: &ScanResult, rng: &mut ChaCha8Rng| -> Result<FitResult> {
        let pts: Vec<(f64, f64)> = scan
            .records()
            .iter()
            .map(|r| (r.chi, sample_poisson(rng, r.counts as f64) as f64))
            .collect();
        let mut fit = super::fit::fit_points(&pts)?;
        fit.alpha = Some(scan.alpha());
        Ok(fit)
    };
    for _ in 0..resamples {
        let fa = redraw(scan_a, &mut rng)?;
        let fb = redraw(scan_a_pi, &mut rng)?;
        values.push(e_obs_from_fits(&fa, &fb, chi)?.value);
    }
    Ok(sample_std(&values))
}
