//! Seeded Poisson count generation for successive phase-shifter scans.
//!
//! Every count is drawn from its own ChaCha8 substream: the generator is keyed
//! by the scan seed and the stream id packs `(repetition, chi index)`. A count
//! therefore depends only on `(scan seed, chi index, repetition)`, never on the
//! order in which points are generated. Scans of a multi-angle experiment get
//! scan seeds derived from the master seed and the angle's index.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::apparatus::{ApparatusModel, ScanPlan};
use crate::error::{domain, Result};
use crate::poisson::sample_poisson;
use crate::setting::{angular_distance, Setting};

/// Stream slot reserved for the per-repetition phase drift draw.
const DRIFT_SLOT: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountRecord {
    pub alpha: f64,
    pub chi: f64,
    pub repetition: u32,
    pub counts: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    plan: ScanPlan,
    records: Vec<CountRecord>,
    seed: u64,
}

impl ScanResult {
    /// Checks that `records` covers the plan exactly once per (chi, repetition).
    pub fn new(plan: ScanPlan, records: Vec<CountRecord>, seed: u64) -> Result<Self> {
        let expected = plan.chi_values().len() * plan.exposures() as usize;
        if records.len() != expected {
            return Err(domain!(
                "scan has {} records, plan requires {} ({} chi values x {} exposures)",
                records.len(),
                expected,
                plan.chi_values().len(),
                plan.exposures()
            ));
        }
        for r in &records {
            if angular_distance(r.alpha, plan.alpha()) > 1e-9 {
                return Err(domain!(
                    "record alpha {} does not match plan alpha {}",
                    r.alpha,
                    plan.alpha()
                ));
            }
            if !plan.chi_values().iter().any(|&c| c.to_bits() == r.chi.to_bits()) {
                return Err(domain!("record chi {} is not in the plan", r.chi));
            }
            if r.repetition >= plan.exposures() {
                return Err(domain!(
                    "record repetition {} exceeds plan exposures {}",
                    r.repetition,
                    plan.exposures()
                ));
            }
        }
        Ok(Self { plan, records, seed })
    }

    pub fn plan(&self) -> &ScanPlan {
        &self.plan
    }

    pub fn records(&self) -> &[CountRecord] {
        &self.records
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn alpha(&self) -> f64 {
        self.plan.alpha()
    }

    /// One single-exposure scan per repetition, records keeping their original index.
    pub fn split_repetitions(&self) -> Vec<ScanResult> {
        (0..self.plan.exposures())
            .map(|rep| {
                let records = self.records.iter().filter(|r| r.repetition == rep).copied().collect();
                let plan = ScanPlan::new(
                    self.plan.alpha(),
                    self.plan.chi_values().to_vec(),
                    self.plan.exposures(),
                )
                .expect("plan already validated");
                ScanResult {
                    plan,
                    records,
                    seed: self.seed,
                }
            })
            .collect()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Scan seed for the `index`-th spin-rotation angle of an experiment.
pub fn derive_scan_seed(master_seed: u64, index: usize) -> u64 {
    splitmix64(master_seed ^ splitmix64(index as u64 + 1))
}

fn substream(scan_seed: u64, chi_index: u32, repetition: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(scan_seed);
    rng.set_stream(((repetition as u64) << 32) | chi_index as u64);
    rng
}

/// Phase drift applied to every point of one repetition; zero when `drift_sigma` is 0.
pub fn repetition_drift(scan_seed: u64, repetition: u32, drift_sigma: f64) -> f64 {
    if !(drift_sigma > 0.0) {
        return 0.0;
    }
    let normal = Normal::new(0.0, drift_sigma).expect("positive finite sigma");
    normal.sample(&mut substream(scan_seed, DRIFT_SLOT, repetition))
}

/// Counts for a single (chi, repetition) cell of a scan.
pub fn sample_point(
    model: &ApparatusModel,
    alpha: f64,
    chi: f64,
    scan_seed: u64,
    chi_index: u32,
    repetition: u32,
    drift_sigma: f64,
) -> Result<u64> {
    let drift = repetition_drift(scan_seed, repetition, drift_sigma);
    let mean = model.predicted_rate(Setting::new(alpha, chi + drift)?);
    Ok(sample_poisson(&mut substream(scan_seed, chi_index, repetition), mean))
}

/// Poisson counts for every point and repetition of `plan`.
pub fn sample_scan(model: &ApparatusModel, plan: &ScanPlan, seed: u64) -> Result<ScanResult> {
    sample_scan_with_drift(model, plan, seed, 0.0)
}

/// As [`sample_scan`], with a zero-mean normal phase drift of width `drift_sigma`
/// (radians) redrawn for each repetition.
pub fn sample_scan_with_drift(
    model: &ApparatusModel,
    plan: &ScanPlan,
    seed: u64,
    drift_sigma: f64,
) -> Result<ScanResult> {
    if !(drift_sigma >= 0.0 && drift_sigma.is_finite()) {
        return Err(domain!(
            "drift sigma must be finite and non-negative, got {drift_sigma}"
        ));
    }
    if plan.chi_values().len() >= DRIFT_SLOT as usize {
        return Err(domain!("too many chi values for one scan"));
    }
    let mut records = Vec::with_capacity(plan.chi_values().len() * plan.exposures() as usize);
    for rep in 0..plan.exposures() {
        for (i, &chi) in plan.chi_values().iter().enumerate() {
            let counts = sample_point(model, plan.alpha(), chi, seed, i as u32, rep, drift_sigma)?;
            records.push(CountRecord {
                alpha: plan.alpha(),
                chi,
                repetition: rep,
                counts,
            });
        }
    }
    ScanResult::new(plan.clone(), records, seed)
}

/// One scan per spin-rotation angle, each repeated `exposures` times over `chi_grid`.
pub fn sample_full_experiment(
    model: &ApparatusModel,
    alphas: &[f64],
    chi_grid: &[f64],
    exposures: u32,
    seed: u64,
) -> Result<Vec<ScanResult>> {
    sample_full_experiment_with_drift(model, alphas, chi_grid, exposures, seed, 0.0)
}

pub fn sample_full_experiment_with_drift(
    model: &ApparatusModel,
    alphas: &[f64],
    chi_grid: &[f64],
    exposures: u32,
    seed: u64,
    drift_sigma: f64,
) -> Result<Vec<ScanResult>> {
    if alphas.is_empty() {
        return Err(domain!("at least one spin-rotation angle is required"));
    }
    if chi_grid.is_empty() {
        return Err(domain!("the chi grid must not be empty"));
    }
    alphas
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let plan = ScanPlan::new(alpha, chi_grid.to_vec(), exposures)?;
            sample_scan_with_drift(model, &plan, derive_scan_seed(seed, i), drift_sigma)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apparatus::{default_alphas, uniform_chi_grid};

    fn plan(n: usize, exposures: u32) -> ScanPlan {
        ScanPlan::new(0.0, uniform_chi_grid(n), exposures).unwrap()
    }

    #[test]
    fn vanishing_rate_gives_zero_counts() {
        let model = ApparatusModel::new(1e-9, 0.0, 0.0).unwrap();
        let scan = sample_scan(&model, &plan(1000, 1000), 3).unwrap();
        let total: u64 = scan.records().iter().map(|r| r.counts).sum();
        assert!(total as f64 / 1e6 < 1e-6);
    }

    #[test]
    fn record_layout_and_counting() {
        let model = ApparatusModel::new(10.0, 0.5, 0.0).unwrap();
        let scans = sample_full_experiment(&model, &default_alphas(), &uniform_chi_grid(32), 16, 7).unwrap();
        assert_eq!(scans.len(), 4);
        for (i, s) in scans.iter().enumerate() {
            assert_eq!(s.records().len(), 512);
            assert_eq!(s.seed(), derive_scan_seed(7, i));
            assert_eq!(s.split_repetitions().len(), 16);
            assert!(s.split_repetitions().iter().all(|r| r.records().len() == 32));
        }
        assert!(sample_full_experiment(&model, &[], &uniform_chi_grid(4), 1, 0).is_err());
        assert!(sample_full_experiment(&model, &[0.0], &[], 1, 0).is_err());
    }

    #[test]
    fn same_inputs_same_output() {
        let model = ApparatusModel::new(300.0, 0.7, 1.0).unwrap();
        let a = sample_scan_with_drift(&model, &plan(16, 4), 99, 0.05).unwrap();
        let b = sample_scan_with_drift(&model, &plan(16, 4), 99, 0.05).unwrap();
        assert_eq!(a, b);
        let c = sample_scan(&model, &plan(16, 4), 100).unwrap();
        assert_ne!(a.records(), c.records());
    }

    #[test]
    fn points_are_order_independent() {
        let model = ApparatusModel::new(80.0, 0.9, 0.2).unwrap();
        let p = plan(8, 3);
        let scan = sample_scan(&model, &p, 5).unwrap();
        // regenerate in reverse order, one point at a time
        for rep in (0..3).rev() {
            for (i, &chi) in p.chi_values().iter().enumerate().rev() {
                let n = sample_point(&model, 0.0, chi, 5, i as u32, rep, 0.0).unwrap();
                let r = scan
                    .records()
                    .iter()
                    .find(|r| r.repetition == rep && r.chi == chi)
                    .unwrap();
                assert_eq!(r.counts, n);
            }
        }
    }

    #[test]
    fn scan_result_validation() {
        let p = plan(4, 1);
        let rec = |chi: f64| CountRecord {
            alpha: 0.0,
            chi,
            repetition: 0,
            counts: 1,
        };
        let chis = p.chi_values().to_vec();
        assert!(ScanResult::new(p.clone(), chis.iter().map(|&c| rec(c)).collect(), 0).is_ok());
        assert!(ScanResult::new(p.clone(), chis[..3].iter().map(|&c| rec(c)).collect(), 0).is_err());
        let mut bad: Vec<_> = chis.iter().map(|&c| rec(c)).collect();
        bad[0].chi = 0.123;
        assert!(ScanResult::new(p.clone(), bad, 0).is_err());
        let mut bad: Vec<_> = chis.iter().map(|&c| rec(c)).collect();
        bad[1].repetition = 1;
        assert!(ScanResult::new(p, bad, 0).is_err());
    }

    #[test]
    fn drift_is_zero_when_disabled() {
        assert_eq!(repetition_drift(1, 0, 0.0), 0.0);
        assert_ne!(repetition_drift(1, 0, 0.1), 0.0);
        assert!(sample_scan_with_drift(&ApparatusModel::ideal(1.0).unwrap(), &plan(4, 1), 0, -1.0).is_err());
    }
}
