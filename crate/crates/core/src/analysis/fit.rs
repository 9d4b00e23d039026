//! Least-squares fit of interference scans to `A·{1 + V·cos(χ + φ)}`.
//!
//! The model is linear in `(a, b, c)` with `f(χ) = a + b·cos χ + c·sin χ`, so
//! `A = a`, `V = √(b² + c²)/a`, `φ = atan2(−c, b)`. Each pass solves the weighted
//! normal equations exactly; weights start at `1/max(counts, 1)` and are then
//! replaced by `1/max(model, 1)` until the parameters stop moving, which is the
//! Poisson maximum-likelihood solution of the linear model.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::montecarlo::ScanResult;
use crate::setting::canonical_angle;

pub const MIN_DISTINCT_CHI: usize = 4;
const MAX_REWEIGHT_PASSES: usize = 100;
const REWEIGHT_TOLERANCE: f64 = 1e-13;
const SINGULAR_PIVOT: f64 = 1e-12;

pub type Matrix3 = [[f64; 3]; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Mean level `A` in counts.
    pub amplitude: f64,
    pub visibility: f64,
    /// Phase `φ` in `[0, 2π)`.
    pub phase: f64,
    /// Covariance of `(A, V, φ)`.
    pub covariance: Matrix3,
    /// Linear coefficients `(a, b, c)`.
    pub linear: [f64; 3],
    pub linear_covariance: Matrix3,
    /// Σ (counts − model)² / max(counts, 1).
    pub chi_square: f64,
    pub dof: usize,
    /// Spin-rotation angle of the fitted scan, when known.
    pub alpha: Option<f64>,
}

impl FitResult {
    /// Fitted curve at phase shift `chi`.
    pub fn model(&self, chi: f64) -> f64 {
        let [a, b, c] = self.linear;
        a + b * libm::cos(chi) + c * libm::sin(chi)
    }

    /// Variance of [`FitResult::model`] at `chi` from the linear covariance.
    pub fn model_variance(&self, chi: f64) -> f64 {
        let g = basis(chi);
        quad_form(&self.linear_covariance, &g, &g)
    }

    pub fn sigma_visibility(&self) -> f64 {
        libm::sqrt(self.covariance[1][1].max(0.0))
    }
}

pub(crate) fn basis(chi: f64) -> [f64; 3] {
    [1.0, libm::cos(chi), libm::sin(chi)]
}

pub(crate) fn quad_form(m: &Matrix3, u: &[f64; 3], v: &[f64; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += u[i] * m[i][j] * v[j];
        }
    }
    s
}

fn invert3(m: &Matrix3) -> Result<Matrix3> {
    let scale = (0..3).map(|i| m[i][i].abs()).fold(0.0, f64::max);
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::SingularFit);
    }
    let mut a = *m;
    let mut inv = [[0.0; 3]; 3];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        if a[pivot][col].abs() <= SINGULAR_PIVOT * scale {
            return Err(Error::SingularFit);
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for k in 0..3 {
            a[col][k] /= p;
            inv[col][k] /= p;
        }
        for row in 0..3 {
            if row != col {
                let f = a[row][col];
                for k in 0..3 {
                    a[row][k] -= f * a[col][k];
                    inv[row][k] -= f * inv[col][k];
                }
            }
        }
    }
    // symmetrize away rounding
    for i in 0..3 {
        for j in (i + 1)..3 {
            let s = 0.5 * (inv[i][j] + inv[j][i]);
            inv[i][j] = s;
            inv[j][i] = s;
        }
    }
    Ok(inv)
}

fn count_distinct_angles(chis: impl Iterator<Item = f64>) -> usize {
    let mut v: Vec<f64> = chis.map(canonical_angle).collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    if v.len() > 1 && (core::f64::consts::TAU - v[v.len() - 1] + v[0]) <= 1e-12 {
        v.pop();
    }
    v.len()
}

/// Weighted solve of the linear model; returns `(coefficients, (XᵀWX)⁻¹)`.
fn weighted_solve(points: &[(f64, f64)], weights: &[f64]) -> Result<([f64; 3], Matrix3)> {
    let mut xtwx = [[0.0; 3]; 3];
    let mut xtwy = [0.0; 3];
    for (&(chi, y), &w) in points.iter().zip(weights) {
        let g = basis(chi);
        for i in 0..3 {
            xtwy[i] += w * g[i] * y;
            for j in 0..3 {
                xtwx[i][j] += w * g[i] * g[j];
            }
        }
    }
    let inv = invert3(&xtwx)?;
    let mut theta = [0.0; 3];
    for i in 0..3 {
        theta[i] = (0..3).map(|j| inv[i][j] * xtwy[j]).sum();
    }
    Ok((theta, inv))
}

/// Fits `(chi, counts)` pairs. Counts may be non-integer (noiseless curves).
pub fn fit_points(points: &[(f64, f64)]) -> Result<FitResult> {
    if let Some(&(chi, y)) = points
        .iter()
        .find(|(c, y)| !c.is_finite() || !y.is_finite() || *y < 0.0)
    {
        return Err(crate::error::domain!("invalid data point (chi={chi}, counts={y})"));
    }
    let distinct = count_distinct_angles(points.iter().map(|p| p.0));
    if distinct < MIN_DISTINCT_CHI {
        return Err(Error::InsufficientData {
            needed: MIN_DISTINCT_CHI,
            got: distinct,
        });
    }

    let mut weights: Vec<f64> = points.iter().map(|&(_, y)| 1.0 / y.max(1.0)).collect();
    let (mut theta, mut cov) = weighted_solve(points, &weights)?;
    for _ in 0..MAX_REWEIGHT_PASSES {
        for (w, &(chi, _)) in weights.iter_mut().zip(points) {
            let m = theta[0] + theta[1] * libm::cos(chi) + theta[2] * libm::sin(chi);
            *w = 1.0 / m.max(1.0);
        }
        let (next, next_cov) = weighted_solve(points, &weights)?;
        let scale = theta.iter().map(|x| x.abs()).fold(1.0, f64::max);
        let moved = theta
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        theta = next;
        cov = next_cov;
        if moved <= REWEIGHT_TOLERANCE * scale {
            break;
        }
    }

    let [a, b, c] = theta;
    let chi_square = points
        .iter()
        .map(|&(chi, y)| {
            let r = y - (a + b * libm::cos(chi) + c * libm::sin(chi));
            r * r / y.max(1.0)
        })
        .sum();

    let r = libm::sqrt(b * b + c * c);
    let visibility = r / a;
    let phase = canonical_angle(libm::atan2(-c, b));
    // Jacobian of (A, V, φ) with respect to (a, b, c).
    let jac: Matrix3 = if r > 0.0 {
        [
            [1.0, 0.0, 0.0],
            [-r / (a * a), b / (a * r), c / (a * r)],
            [0.0, c / (r * r), -b / (r * r)],
        ]
    } else {
        [[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]
    };
    let mut covariance = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            covariance[i][j] = quad_form(&cov, &jac[i], &jac[j]);
        }
    }

    Ok(FitResult {
        amplitude: a,
        visibility,
        phase,
        covariance,
        linear: theta,
        linear_covariance: cov,
        chi_square,
        dof: points.len() - 3,
        alpha: None,
    })
}

/// Fits every record of a scan (all repetitions pooled).
pub fn fit_sinusoid(scan: &ScanResult) -> Result<FitResult> {
    let points: Vec<(f64, f64)> = scan.records().iter().map(|r| (r.chi, r.counts as f64)).collect();
    let mut fit = fit_points(&points)?;
    fit.alpha = Some(scan.alpha());
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setting::angular_distance;
    use core::f64::consts::PI;

    fn curve(a: f64, v: f64, phi: f64, chis: &[f64]) -> Vec<(f64, f64)> {
        chis.iter().map(|&x| (x, a * (1.0 + v * libm::cos(x + phi)))).collect()
    }

    fn grid(n: usize) -> Vec<f64> {
        crate::apparatus::uniform_chi_grid(n)
    }

    #[test]
    fn noiseless_round_trip() {
        let fit = fit_points(&curve(1000.0, 0.73, PI, &grid(32))).unwrap();
        assert!((fit.amplitude - 1000.0).abs() < 1e-9);
        assert!((fit.visibility - 0.73).abs() < 1e-9);
        assert!(angular_distance(fit.phase, PI) < 1e-9);
        assert_eq!(fit.dof, 29);
        assert!(fit.chi_square < 1e-15);
    }

    #[test]
    fn too_few_distinct_points() {
        let pts = curve(10.0, 0.5, 0.0, &[0.0, 1.0, 2.0, 0.0, 1.0 + 2.0 * PI]);
        assert_eq!(fit_points(&pts), Err(Error::InsufficientData { needed: 4, got: 3 }));
        let pts = curve(10.0, 0.5, 0.0, &[0.0, 1e-13 + 2.0 * PI - 2e-13, 1.0, 2.0]);
        assert!(matches!(fit_points(&pts), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn degenerate_design_is_singular() {
        // distinct angles, but clustered so tightly that cos/sin/1 are collinear
        let pts = curve(10.0, 0.5, 0.0, &[0.3, 0.3 + 1e-9, 0.3 + 2e-9, 0.3 + 3e-9]);
        assert_eq!(fit_points(&pts), Err(Error::SingularFit));
        // two angle classes mod 2π are caught earlier as insufficient data
        let pts = curve(10.0, 0.5, 0.0, &[0.3, 0.3 + PI, 0.3 + 2.0 * PI, 0.3 + 3.0 * PI]);
        assert!(matches!(fit_points(&pts), Err(Error::InsufficientData { got: 2, .. })));
    }

    #[test]
    fn negative_counts_rejected() {
        let mut pts = curve(10.0, 0.5, 0.0, &grid(8));
        pts[2].1 = -1.0;
        assert!(matches!(fit_points(&pts), Err(Error::Domain(_))));
    }

    #[test]
    fn covariance_is_symmetric_psd() {
        let pts: Vec<(f64, f64)> = grid(16)
            .into_iter()
            .enumerate()
            .map(|(i, x)| {
                (
                    x,
                    100.0 * (1.0 + 0.6 * libm::cos(x + 0.4)) + if i % 2 == 0 { 7.0 } else { -5.0 },
                )
            })
            .collect();
        let fit = fit_points(&pts).unwrap();
        for m in [fit.covariance, fit.linear_covariance] {
            for i in 0..3 {
                assert!(m[i][i] >= 0.0);
                for j in 0..3 {
                    assert!((m[i][j] - m[j][i]).abs() < 1e-9);
                }
            }
            // 2x2 and 3x3 leading minors
            assert!(m[0][0] * m[1][1] - m[0][1] * m[1][0] >= -1e-9);
        }
        assert!(fit.chi_square > 0.0);
    }
}
