//! End-to-end data reduction: scans → fits → correlations → S′.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::chsh::{
    e_obs_from_fits, s_prime, weighted_average, ChshResult, ChshSettings, ExpectationEstimate, SignConvention,
};
use super::fit::{fit_sinusoid, FitResult};
use crate::error::{domain, Result};
use crate::montecarlo::ScanResult;
use crate::setting::angular_distance;

const ALPHA_MATCH: f64 = 1e-9;

/// The spin-rotation angles whose fits a CHSH evaluation needs: `α₁, α₁+π, α₂, α₂+π`.
pub fn required_alphas(settings: &ChshSettings) -> [f64; 4] {
    let [a1, a2] = settings.alphas();
    [a1, a1 + PI, a2, a2 + PI]
}

fn missing_alphas_error(settings: &ChshSettings) -> crate::Error {
    let listed: Vec<String> = required_alphas(settings)
        .iter()
        .map(|a| alloc::format!("{:.6}", crate::setting::canonical_angle(*a)))
        .collect();
    domain!("fits are required at alpha = {} rad", listed.join(", "))
}

fn find_by_alpha<T>(items: &[T], alpha: f64, key: impl Fn(&T) -> Option<f64>) -> Option<&T> {
    items
        .iter()
        .find(|t| key(t).is_some_and(|a| angular_distance(a, alpha) <= ALPHA_MATCH))
}

/// S′ from one fit per spin-rotation angle.
pub fn chsh_from_fits(fits: &[FitResult], settings: &ChshSettings, convention: SignConvention) -> Result<ChshResult> {
    let lookup = |alpha: f64| find_by_alpha(fits, alpha, |f| f.alpha).ok_or_else(|| missing_alphas_error(settings));
    let mut terms = Vec::with_capacity(4);
    for alpha in settings.alphas() {
        let (fa, fb) = (lookup(alpha)?, lookup(alpha + PI)?);
        for chi in settings.chis() {
            terms.push(e_obs_from_fits(fa, fb, chi)?);
        }
    }
    Ok(s_prime(terms[0], terms[1], terms[2], terms[3], convention))
}

/// Per-term reduction over repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct TermSummary {
    /// Inverse-variance weighted mean over repetitions.
    pub combined: ExpectationEstimate,
    /// One estimate per repetition.
    pub per_repetition: Vec<ExpectationEstimate>,
    /// χ² of the repetition values about the weighted mean.
    pub scatter_chi_square: f64,
    /// Extra spread beyond counting statistics, `σ_stat·√(χ²/ν − 1)` when positive.
    pub sigma_systematic: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepeatedChsh {
    /// S′ built from the weighted means; its sigma is purely statistical.
    pub chsh: ChshResult,
    pub terms: [TermSummary; 4],
    /// Term systematics added in quadrature.
    pub sigma_systematic: f64,
    /// Pooled fit for each scan, in input order.
    pub pooled_fits: Vec<FitResult>,
}

impl RepeatedChsh {
    pub fn sigma_statistical(&self) -> f64 {
        self.chsh.sigma
    }

    /// Statistical plus systematic, added linearly.
    pub fn sigma_total(&self) -> f64 {
        self.chsh.sigma + self.sigma_systematic
    }
}

fn summarize(per_repetition: Vec<ExpectationEstimate>) -> Result<TermSummary> {
    let combined = weighted_average(&per_repetition)?;
    let chi2: f64 = per_repetition
        .iter()
        .map(|e| {
            let d = (e.value - combined.value) / e.sigma;
            d * d
        })
        .sum();
    let dof = per_repetition.len().saturating_sub(1);
    let sigma_systematic = if dof > 0 && chi2 > dof as f64 {
        combined.sigma * libm::sqrt(chi2 / dof as f64 - 1.0)
    } else {
        0.0
    };
    Ok(TermSummary {
        combined,
        per_repetition,
        scatter_chi_square: chi2,
        sigma_systematic,
    })
}

/// Fits every repetition of every scan separately, forms one correlation per
/// repetition and term, averages over repetitions and combines into S′.
pub fn chsh_from_repetitions(
    scans: &[ScanResult],
    settings: &ChshSettings,
    convention: SignConvention,
) -> Result<RepeatedChsh> {
    let lookup =
        |alpha: f64| find_by_alpha(scans, alpha, |s| Some(s.alpha())).ok_or_else(|| missing_alphas_error(settings));
    let mut summaries = Vec::with_capacity(4);
    for alpha in settings.alphas() {
        let (sa, sb) = (lookup(alpha)?, lookup(alpha + PI)?);
        let (reps_a, reps_b) = (sa.split_repetitions(), sb.split_repetitions());
        if reps_a.len() != reps_b.len() {
            return Err(domain!(
                "scans at alpha and alpha + pi have different repetition counts"
            ));
        }
        let fits: Vec<(FitResult, FitResult)> = reps_a
            .iter()
            .zip(reps_b.iter())
            .map(|(a, b)| Ok((fit_sinusoid(a)?, fit_sinusoid(b)?)))
            .collect::<Result<_>>()?;
        for chi in settings.chis() {
            let per_rep = fits
                .iter()
                .map(|(fa, fb)| e_obs_from_fits(fa, fb, chi))
                .collect::<Result<Vec<_>>>()?;
            summaries.push(summarize(per_rep)?);
        }
    }
    let terms: [TermSummary; 4] = summaries.try_into().expect("four terms");
    let chsh = s_prime(
        terms[0].combined,
        terms[1].combined,
        terms[2].combined,
        terms[3].combined,
        convention,
    );
    let sigma_systematic = libm::sqrt(terms.iter().map(|t| t.sigma_systematic * t.sigma_systematic).sum());
    let pooled_fits = scans.iter().map(fit_sinusoid).collect::<Result<Vec<_>>>()?;
    Ok(RepeatedChsh {
        chsh,
        terms,
        sigma_systematic,
        pooled_fits,
    })
}
