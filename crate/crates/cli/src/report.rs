//! JSON report shapes. Every top-level document carries `schema_version` and
//! `kind`. Floats are written in shortest round-trip form.

use serde::{Deserialize, Serialize};
use spinpath::analysis::{ExpectationEstimate, FitResult, Matrix3};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub file: String,
    pub alpha: String,
    pub alpha_rad: f64,
    pub seed: u64,
    pub chi_points: usize,
    pub repetitions: u32,
    pub records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub kind: String,
    pub config_hash: String,
    pub config: String,
    pub master_seed: u64,
    pub drift_sigma: f64,
    pub files: Vec<ManifestFile>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub chi_rad: f64,
    pub repetition: u32,
    pub counts: u64,
    pub model: f64,
    pub residual: f64,
    /// Residual over `√max(model, 1)`.
    pub pull: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    pub source: String,
    pub alpha_rad: f64,
    pub amplitude: f64,
    pub visibility: f64,
    pub phase: f64,
    pub sigma_amplitude: f64,
    pub sigma_visibility: f64,
    pub sigma_phase: f64,
    pub covariance: Matrix3,
    pub linear: [f64; 3],
    pub linear_covariance: Matrix3,
    pub chi_square: f64,
    pub dof: usize,
    pub residuals: Vec<Residual>,
}

impl FitEntry {
    pub fn to_fit(&self) -> FitResult {
        FitResult {
            amplitude: self.amplitude,
            visibility: self.visibility,
            phase: self.phase,
            covariance: self.covariance,
            linear: self.linear,
            linear_covariance: self.linear_covariance,
            chi_square: self.chi_square,
            dof: self.dof,
            alpha: Some(self.alpha_rad),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub kind: String,
    pub fits: Vec<FitEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingsOut {
    pub alpha1: String,
    pub alpha2: String,
    pub chi1: String,
    pub chi2: String,
    pub alpha1_rad: f64,
    pub alpha2_rad: f64,
    pub chi1_rad: f64,
    pub chi2_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermOut {
    pub label: String,
    pub alpha_rad: f64,
    pub chi_rad: f64,
    /// Sign with which the term enters S′.
    pub sign: f64,
    pub value: f64,
    pub sigma: f64,
    pub variance_clamped: bool,
}

impl TermOut {
    pub fn new(label: String, sign: f64, e: &ExpectationEstimate) -> Self {
        Self {
            label,
            alpha_rad: e.setting.alpha(),
            chi_rad: e.setting.chi(),
            sign,
            value: e.value,
            sigma: e.sigma,
            variance_clamped: e.variance_clamped,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshReport {
    pub schema_version: u32,
    pub kind: String,
    pub settings: SettingsOut,
    pub sign_convention: u8,
    pub terms: Vec<TermOut>,
    pub s_prime: f64,
    pub sigma: f64,
    pub significance: f64,
    pub violated: bool,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub visibility: f64,
    pub s_analytic: f64,
    pub s_simulated: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub schema_version: u32,
    pub kind: String,
    pub counts_per_point: f64,
    pub chi_points: usize,
    pub sign_convention: u8,
    pub analytic_threshold: f64,
    /// Adjacent sweep visibilities between which the simulated S′ first exceeds 2.
    pub simulated_crossing: Option<[f64; 2]>,
    pub rows: Vec<ThresholdRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRow {
    pub index: usize,
    /// Outcomes for alpha1, alpha2.
    pub spin: [i8; 2],
    /// Outcomes for chi1, chi2.
    pub path: [i8; 2],
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleOut {
    pub name: String,
    pub weights: Vec<f64>,
    pub exact_s: f64,
    pub shots_per_term: u64,
    pub sampled_s: f64,
    pub sampled_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LhvReport {
    pub schema_version: u32,
    pub kind: String,
    pub settings: SettingsOut,
    pub sign_convention: u8,
    pub strategies: Vec<StrategyRow>,
    pub max_abs_s: f64,
    /// Largest strategy |S| under conventions 0 to 3.
    pub max_abs_s_by_convention: [f64; 4],
    pub classical_bound: f64,
    pub ensembles: Vec<EnsembleOut>,
    pub quantum_at_settings: f64,
    pub quantum_comparison: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproduceTerm {
    pub label: String,
    pub alpha_rad: f64,
    pub chi_rad: f64,
    pub sign: f64,
    pub value: f64,
    pub sigma_statistical: f64,
    pub sigma_systematic: f64,
    pub sigma_total: f64,
    pub repetitions: usize,
    pub scatter_chi_square: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledFit {
    pub alpha_rad: f64,
    pub visibility: f64,
    pub sigma_visibility: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparatorTerm {
    pub label: String,
    pub value: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermComparison {
    pub label: String,
    pub simulated: f64,
    pub reference: f64,
    /// `||simulated| − |reference||`.
    pub magnitude_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparator {
    pub terms: Vec<ComparatorTerm>,
    pub s_prime: f64,
    pub sigma: f64,
    pub analytic_s_prime: f64,
    pub term_comparison: Vec<TermComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproduceSummary {
    pub schema_version: u32,
    pub kind: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub mean_rate: f64,
    pub repetitions: u32,
    pub chi_points: usize,
    pub settings: SettingsOut,
    pub sign_convention: u8,
    pub terms: Vec<ReproduceTerm>,
    pub s_prime: f64,
    pub sigma_statistical: f64,
    pub sigma_systematic: f64,
    pub sigma_total: f64,
    pub significance: f64,
    pub violated: bool,
    pub verdict: String,
    pub pooled_fits: Vec<PooledFit>,
    pub comparator: Comparator,
    pub files: Vec<String>,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
