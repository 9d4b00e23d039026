//! Noncontextual hidden-variable reference model.
//!
//! A deterministic strategy fixes a ±1 outcome for each spin setting and each
//! path setting, independent of what is measured alongside it. Every
//! noncontextual model for two dichotomic observables per subsystem is a convex
//! mixture of the 16 such strategies, so enumerating them certifies the bound
//! `|S| ≤ 2`. Settings are matched by exact value, not by angle proximity.

use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{chsh_combination, e_obs_from_counts, ChshSettings, ExpectationEstimate, SignConvention};
use crate::error::{domain, Result};
use crate::quantum::Sign;

pub const WEIGHT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LhvStrategy {
    spin: [(f64, Sign); 2],
    path: [(f64, Sign); 2],
}

fn lookup(table: &[(f64, Sign); 2], angle: f64) -> Option<Sign> {
    table
        .iter()
        .find(|(a, _)| a.to_bits() == angle.to_bits())
        .map(|&(_, s)| s)
}

impl LhvStrategy {
    pub fn new(spin: [(f64, Sign); 2], path: [(f64, Sign); 2]) -> Self {
        Self { spin, path }
    }

    pub fn spin_outcome(&self, alpha: f64) -> Option<Sign> {
        lookup(&self.spin, alpha)
    }

    pub fn path_outcome(&self, chi: f64) -> Option<Sign> {
        lookup(&self.path, chi)
    }

    pub fn spin_outcomes(&self) -> &[(f64, Sign); 2] {
        &self.spin
    }

    pub fn path_outcomes(&self) -> &[(f64, Sign); 2] {
        &self.path
    }

    /// The same strategy with every spin outcome reversed.
    pub fn flip_spin(&self) -> Self {
        let flip = |s: Sign| if s == Sign::Plus { Sign::Minus } else { Sign::Plus };
        Self {
            spin: self.spin.map(|(a, s)| (a, flip(s))),
            path: self.path,
        }
    }

    fn outcomes(&self, settings: &ChshSettings) -> Result<[(Sign, Sign); 4]> {
        let mut out = [(Sign::Plus, Sign::Plus); 4];
        let mut k = 0;
        for alpha in settings.alphas() {
            let s = self
                .spin_outcome(alpha)
                .ok_or_else(|| domain!("strategy has no outcome for spin setting {alpha}"))?;
            for chi in settings.chis() {
                let p = self
                    .path_outcome(chi)
                    .ok_or_else(|| domain!("strategy has no outcome for path setting {chi}"))?;
                out[k] = (s, p);
                k += 1;
            }
        }
        Ok(out)
    }
}

fn check_pair(name: &str, pair: [f64; 2]) -> Result<()> {
    if !pair.iter().all(|x| x.is_finite()) {
        return Err(domain!("{name} settings must be finite"));
    }
    if pair[0].to_bits() == pair[1].to_bits() {
        return Err(domain!("the two {name} settings must differ, both are {}", pair[0]));
    }
    Ok(())
}

/// All 2² × 2² deterministic outcome assignments for two spin and two path settings.
pub fn enumerate_strategies(alphas: [f64; 2], chis: [f64; 2]) -> Result<Vec<LhvStrategy>> {
    check_pair("spin", alphas)?;
    check_pair("path", chis)?;
    let sign = |bit: usize| if bit == 0 { Sign::Plus } else { Sign::Minus };
    Ok((0..16usize)
        .map(|m| {
            LhvStrategy::new(
                [(alphas[0], sign(m & 1)), (alphas[1], sign((m >> 1) & 1))],
                [(chis[0], sign((m >> 2) & 1)), (chis[1], sign((m >> 3) & 1))],
            )
        })
        .collect())
}

/// CHSH value of a deterministic strategy: signed sum of outcome products.
pub fn strategy_s(strategy: &LhvStrategy, settings: &ChshSettings, convention: SignConvention) -> Result<f64> {
    let products = strategy.outcomes(settings)?.map(|(s, p)| s.value() * p.value());
    Ok(chsh_combination(products, convention))
}

/// Convex mixture of deterministic strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct LhvEnsemble {
    strategies: Vec<LhvStrategy>,
    weights: Vec<f64>,
}

impl LhvEnsemble {
    pub fn new(strategies: Vec<LhvStrategy>, weights: Vec<f64>) -> Result<Self> {
        if strategies.is_empty() || strategies.len() != weights.len() {
            return Err(domain!(
                "ensemble needs one weight per strategy ({} strategies, {} weights)",
                strategies.len(),
                weights.len()
            ));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(domain!("ensemble weights must be non-negative, got {w}"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(domain!("ensemble weights sum to {total}, expected 1"));
        }
        Ok(Self { strategies, weights })
    }

    pub fn uniform(strategies: Vec<LhvStrategy>) -> Result<Self> {
        let w = 1.0 / strategies.len() as f64;
        let weights = alloc::vec![w; strategies.len()];
        Self::new(strategies, weights)
    }

    pub fn point_mass(strategy: LhvStrategy) -> Self {
        Self {
            strategies: alloc::vec![strategy],
            weights: alloc::vec![1.0],
        }
    }

    pub fn strategies(&self) -> &[LhvStrategy] {
        &self.strategies
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Weight-averaged strategy value.
pub fn ensemble_s(ensemble: &LhvEnsemble, settings: &ChshSettings, convention: SignConvention) -> Result<f64> {
    ensemble
        .strategies
        .iter()
        .zip(&ensemble.weights)
        .map(|(s, w)| Ok(w * strategy_s(s, settings, convention)?))
        .sum()
}

/// Outcome tallies per CHSH term, each in the order `(++, −−, +−, −+)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LhvCounts {
    pub cells: [[u64; 4]; 4],
}

impl LhvCounts {
    /// Per-term correlation estimates from the count ratio.
    pub fn estimates(&self, settings: &ChshSettings) -> Result<[ExpectationEstimate; 4]> {
        let terms = settings.terms();
        let mut out = Vec::with_capacity(4);
        for (cell, setting) in self.cells.iter().zip(terms) {
            let [pp, mm, pm, mp] = cell.map(|n| n as f64);
            out.push(e_obs_from_counts(setting, pp, mm, pm, mp)?);
        }
        Ok(out.try_into().expect("four terms"))
    }

    pub fn empirical_s(&self, settings: &ChshSettings, convention: SignConvention) -> Result<f64> {
        Ok(chsh_combination(self.estimates(settings)?.map(|e| e.value), convention))
    }
}

fn outcome_slot(s: Sign, p: Sign) -> usize {
    match (s, p) {
        (Sign::Plus, Sign::Plus) => 0,
        (Sign::Minus, Sign::Minus) => 1,
        (Sign::Plus, Sign::Minus) => 2,
        (Sign::Minus, Sign::Plus) => 3,
    }
}

/// Draws `shots` hidden-variable instances per CHSH term and tallies the outcomes.
pub fn sample_ensemble_counts(
    ensemble: &LhvEnsemble,
    settings: &ChshSettings,
    shots: u64,
    seed: u64,
) -> Result<LhvCounts> {
    if shots == 0 {
        return Err(domain!("shots must be at least 1"));
    }
    let table = ensemble
        .strategies
        .iter()
        .map(|s| s.outcomes(settings))
        .collect::<Result<Vec<_>>>()?;
    let picker = WeightedIndex::new(&ensemble.weights).map_err(|e| domain!("invalid ensemble weights: {e}"))?;
    let mut cells = [[0u64; 4]; 4];
    for (term, cell) in cells.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(term as u64);
        for _ in 0..shots {
            let (s, p) = table[picker.sample(&mut rng)][term];
            cell[outcome_slot(s, p)] += 1;
        }
    }
    Ok(LhvCounts { cells })
}
