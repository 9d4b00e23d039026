//! Phenomenological instrument model: contrast per spin-rotation angle, a global
//! phase offset between the two beams, and the mean count per scan point.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{domain, Result};
use crate::setting::{angular_distance, canonical_angle, check_finite, Setting};

/// Angles closer than this (after reduction mod 2π) share a visibility entry.
pub const ALPHA_MATCH_TOLERANCE: f64 = 1e-9;

/// Contrast of the `α = 0` curve in the reference run.
pub const PAPER_VISIBILITY_ALPHA0: f64 = 0.76;
/// Contrast of the remaining three curves in the reference run.
pub const PAPER_VISIBILITY_OTHERS: f64 = 0.73;
/// Relative phase picked up at the spin turner.
pub const PAPER_PHASE_OFFSET: f64 = PI;

/// Mean counts per scan point used by [`paper_apparatus`].
///
/// Calibrated so that 16 repetitions of a 32-point scan per spin-rotation
/// angle give σ(S′) ≈ 0.012 after fitting and weighted averaging.
pub const DEFAULT_MEAN_RATE: f64 = 40.0;
pub const DEFAULT_REPETITIONS: u32 = 16;
pub const DEFAULT_CHI_POINTS: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct ApparatusModel {
    mean_rate: f64,
    visibility_map: Vec<(f64, f64)>,
    default_visibility: f64,
    phase_offset: f64,
}

fn check_visibility(v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(domain!("visibility must lie in [0, 1], got {v}"))
    }
}

impl ApparatusModel {
    pub fn new(mean_rate: f64, default_visibility: f64, phase_offset: f64) -> Result<Self> {
        if !(mean_rate > 0.0 && mean_rate.is_finite()) {
            return Err(domain!("mean_rate must be positive and finite, got {mean_rate}"));
        }
        check_visibility(default_visibility)?;
        check_finite("phase_offset", phase_offset)?;
        Ok(Self {
            mean_rate,
            visibility_map: Vec::new(),
            default_visibility,
            phase_offset,
        })
    }

    /// Perfect instrument: unit contrast, no offset.
    pub fn ideal(mean_rate: f64) -> Result<Self> {
        Self::new(mean_rate, 1.0, 0.0)
    }

    /// Adds (or replaces) the contrast used for spin-rotation angle `alpha`.
    pub fn with_visibility(mut self, alpha: f64, visibility: f64) -> Result<Self> {
        check_finite("alpha", alpha)?;
        check_visibility(visibility)?;
        let alpha = canonical_angle(alpha);
        match self
            .visibility_map
            .iter_mut()
            .find(|(a, _)| angular_distance(*a, alpha) <= ALPHA_MATCH_TOLERANCE)
        {
            Some(entry) => entry.1 = visibility,
            None => self.visibility_map.push((alpha, visibility)),
        }
        Ok(self)
    }

    pub fn with_mean_rate(mut self, mean_rate: f64) -> Result<Self> {
        if !(mean_rate > 0.0 && mean_rate.is_finite()) {
            return Err(domain!("mean_rate must be positive and finite, got {mean_rate}"));
        }
        self.mean_rate = mean_rate;
        Ok(self)
    }

    pub fn with_phase_offset(mut self, phase_offset: f64) -> Result<Self> {
        check_finite("phase_offset", phase_offset)?;
        self.phase_offset = phase_offset;
        Ok(self)
    }

    pub fn mean_rate(&self) -> f64 {
        self.mean_rate
    }

    pub fn default_visibility(&self) -> f64 {
        self.default_visibility
    }

    pub fn phase_offset(&self) -> f64 {
        self.phase_offset
    }

    pub fn visibility_map(&self) -> &[(f64, f64)] {
        &self.visibility_map
    }

    /// Contrast at spin-rotation angle `alpha`, falling back to the default.
    pub fn visibility(&self, alpha: f64) -> f64 {
        let alpha = canonical_angle(alpha);
        self.visibility_map
            .iter()
            .find(|(a, _)| angular_distance(*a, alpha) <= ALPHA_MATCH_TOLERANCE)
            .map_or(self.default_visibility, |&(_, v)| v)
    }

    /// Expected counts `mean_rate · {1 + V(α)·cos(α + χ + offset)}`.
    pub fn predicted_rate(&self, setting: Setting) -> f64 {
        let c = libm::cos(setting.alpha() + setting.chi() + self.phase_offset);
        (self.mean_rate * (1.0 + self.visibility(setting.alpha()) * c)).max(0.0)
    }

    /// Noiseless joint expectation `V(α)·cos(α + χ + offset)`.
    pub fn ideal_expectation(&self, setting: Setting) -> f64 {
        self.visibility(setting.alpha()) * libm::cos(setting.alpha() + setting.chi() + self.phase_offset)
    }
}

/// Instrument matching the reference run: V(0) = 0.76, V = 0.73 at π/2, π and 3π/2,
/// offset π, mean rate [`DEFAULT_MEAN_RATE`].
pub fn paper_apparatus() -> ApparatusModel {
    let build = || {
        ApparatusModel::new(DEFAULT_MEAN_RATE, PAPER_VISIBILITY_OTHERS, PAPER_PHASE_OFFSET)?
            .with_visibility(0.0, PAPER_VISIBILITY_ALPHA0)?
            .with_visibility(FRAC_PI_2, PAPER_VISIBILITY_OTHERS)?
            .with_visibility(PI, PAPER_VISIBILITY_OTHERS)?
            .with_visibility(3.0 * FRAC_PI_2, PAPER_VISIBILITY_OTHERS)
    };
    build().expect("reference apparatus parameters are valid")
}

/// Spin-rotation angles of the four reference scans.
pub fn default_alphas() -> [f64; 4] {
    [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2]
}

/// `n` equally spaced phase-shifter positions covering `[0, 2π)`.
pub fn uniform_chi_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

/// One phase-shifter scan at fixed spin rotation, repeated `exposures` times.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPlan {
    alpha: f64,
    chi_values: Vec<f64>,
    exposures: u32,
}

impl ScanPlan {
    pub fn new(alpha: f64, chi_values: Vec<f64>, exposures: u32) -> Result<Self> {
        check_finite("alpha", alpha)?;
        if chi_values.is_empty() {
            return Err(domain!("scan plan needs at least one chi value"));
        }
        if let Some(x) = chi_values.iter().find(|x| !x.is_finite()) {
            return Err(domain!("chi values must be finite, got {x}"));
        }
        if exposures == 0 {
            return Err(domain!("exposures must be at least 1"));
        }
        Ok(Self {
            alpha,
            chi_values,
            exposures,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn chi_values(&self) -> &[f64] {
        &self.chi_values
    }

    pub fn exposures(&self) -> u32 {
        self.exposures
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{max_violation_settings, s_of_visibility};
    use crate::quantum::{bell_state, expectation};

    fn setting(a: f64, x: f64) -> Setting {
        Setting::new(a, x).unwrap()
    }

    #[test]
    fn predicted_rate_examples() {
        let ideal = ApparatusModel::ideal(1000.0).unwrap();
        assert!((ideal.predicted_rate(setting(0.0, 0.0)) - 2000.0).abs() < 1e-9);

        let m = ApparatusModel::new(1000.0, 0.73, PI).unwrap();
        // cos(1.79π) = cos(0.21π) ≈ 0.79016.
        let c = libm::cos(0.21 * PI);
        assert!((libm::cos(1.79 * PI) - c).abs() < 1e-12);
        let r = m.predicted_rate(setting(0.0, 0.79 * PI));
        assert!((r - 1000.0 * (1.0 + 0.73 * c)).abs() < 1e-9);
        assert!((r - 1576.8).abs() < 0.1);

        let r = m.predicted_rate(setting(0.3, FRAC_PI_2 - 0.3 - PI));
        assert!((r - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn ideal_expectation_examples() {
        let ideal = ApparatusModel::ideal(1.0).unwrap();
        for &(a, x) in &[(0.1, 0.2), (2.0, 4.0), (5.9, 0.7)] {
            let s = setting(a, x);
            assert!((ideal.ideal_expectation(s) - expectation(&bell_state(), s).unwrap()).abs() < 1e-12);
        }
        let m = ApparatusModel::new(1.0, 0.76, PI).unwrap();
        let e = m.ideal_expectation(setting(0.0, 0.79 * PI));
        assert!((e - 0.6005).abs() < 5e-4);

        let v = core::f64::consts::FRAC_1_SQRT_2;
        let thr = ApparatusModel::new(1.0, v, 0.0).unwrap();
        let (e, _) = max_violation_settings().evaluate(|s| thr.ideal_expectation(s));
        assert!((e.abs() - 2.0).abs() < 1e-12);
        assert!((s_of_visibility(v) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn paper_apparatus_parameters() {
        let m = paper_apparatus();
        assert_eq!(m.visibility(0.0), 0.76);
        assert_eq!(m.visibility(FRAC_PI_2), 0.73);
        assert_eq!(m.visibility(PI), 0.73);
        assert_eq!(m.visibility(-FRAC_PI_2), 0.73);
        assert_eq!(m.visibility(TAU), 0.76);
        assert_eq!(m.phase_offset(), PI);
        assert_eq!(m.mean_rate(), DEFAULT_MEAN_RATE);
        // unmatched alpha falls back to the default contrast
        assert_eq!(m.visibility(1.0), 0.73);
    }

    #[test]
    fn invalid_models_are_rejected() {
        assert!(ApparatusModel::new(0.0, 0.5, 0.0).is_err());
        assert!(ApparatusModel::new(-1.0, 0.5, 0.0).is_err());
        assert!(ApparatusModel::new(1.0, 1.5, 0.0).is_err());
        assert!(ApparatusModel::new(1.0, 0.5, f64::NAN).is_err());
        assert!(ApparatusModel::ideal(1.0).unwrap().with_visibility(0.0, -0.2).is_err());
        assert!(ScanPlan::new(0.0, Vec::new(), 1).is_err());
        assert!(ScanPlan::new(0.0, alloc::vec![0.0], 0).is_err());
    }

    #[test]
    fn chi_grid_is_uniform() {
        let g = uniform_chi_grid(32);
        assert_eq!(g.len(), 32);
        assert_eq!(g[0], 0.0);
        assert!((g[16] - PI).abs() < 1e-15);
        assert!(g.iter().all(|&x| x < TAU));
    }
}
