//! Measurement contexts: a spin-rotation angle paired with a phase shift.

use core::f64::consts::{PI, TAU};

use crate::error::{domain, Result};

/// Maps a finite angle onto its representative in `[0, 2π)`.
pub fn canonical_angle(theta: f64) -> f64 {
    let r = theta - TAU * libm::floor(theta / TAU);
    // floor() rounding can land exactly on 2π for tiny negative inputs.
    if !(0.0..TAU).contains(&r) {
        0.0
    } else {
        r
    }
}

/// Smallest absolute difference between two angles on the circle.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = canonical_angle(a - b);
    if d > PI {
        TAU - d
    } else {
        d
    }
}

/// A measurement context: spin-rotation angle `alpha` and phase shift `chi`, in radians.
///
/// Both angles are stored canonicalized to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setting {
    alpha: f64,
    chi: f64,
}

impl Setting {
    pub fn new(alpha: f64, chi: f64) -> Result<Self> {
        if !alpha.is_finite() || !chi.is_finite() {
            return Err(domain!("setting angles must be finite (alpha={alpha}, chi={chi})"));
        }
        Ok(Self {
            alpha: canonical_angle(alpha),
            chi: canonical_angle(chi),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    /// Equality on the circle within `tol` radians for both angles.
    pub fn approx_eq(&self, other: &Setting, tol: f64) -> bool {
        angular_distance(self.alpha, other.alpha) <= tol && angular_distance(self.chi, other.chi) <= tol
    }
}

pub(crate) fn check_finite(name: &str, theta: f64) -> Result<()> {
    if theta.is_finite() {
        Ok(())
    } else {
        Err(domain!("{name} must be finite, got {theta}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalizes_negative_and_large_angles() {
        let s = Setting::new(-PI / 4.0, 5.0 * PI).unwrap();
        assert!((s.alpha() - 7.0 * PI / 4.0).abs() < 1e-15);
        assert!((s.chi() - PI).abs() < 1e-14);
        assert_eq!(canonical_angle(-1e-300), 0.0);
        assert_eq!(canonical_angle(TAU), 0.0);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Setting::new(f64::NAN, 0.0).is_err());
        assert!(Setting::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn circular_equality() {
        let a = Setting::new(1e-12, 0.0).unwrap();
        let b = Setting::new(TAU - 1e-12, 0.0).unwrap();
        assert!(a.approx_eq(&b, 1e-9));
        assert!(!a.approx_eq(&Setting::new(0.1, 0.0).unwrap(), 1e-9));
    }
}
