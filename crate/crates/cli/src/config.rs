//! Run configuration in a flat `key = value` text format.
//!
//! Lines starting with `#` and blank lines are ignored. Angles accept π
//! literals (`chi1 = 0.79pi`). Lists are comma separated; the visibility map
//! is a list of `angle:value` pairs. [`RunConfig::to_text`] writes every key in
//! a fixed order, and that text is what the manifest hash covers.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use spinpath::analysis::{ChshSettings, SignConvention};
use spinpath::apparatus::{
    ApparatusModel, DEFAULT_CHI_POINTS, DEFAULT_MEAN_RATE, DEFAULT_REPETITIONS, PAPER_VISIBILITY_ALPHA0,
    PAPER_VISIBILITY_OTHERS,
};

use crate::angle::Angle;
use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 2003;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub mean_rate: f64,
    pub default_visibility: f64,
    pub visibility: Vec<(Angle, f64)>,
    pub phase_offset: Angle,
    pub drift_sigma: f64,
    pub alphas: Vec<Angle>,
    pub chi_points: usize,
    pub repetitions: u32,
    pub out: PathBuf,
    pub sign_convention: u8,
    pub alpha1: Angle,
    pub alpha2: Angle,
    pub chi1: Angle,
    pub chi2: Angle,
    pub threshold_visibilities: Vec<f64>,
    pub threshold_rate: f64,
    pub lhv_shots: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            mean_rate: DEFAULT_MEAN_RATE,
            default_visibility: PAPER_VISIBILITY_OTHERS,
            visibility: vec![(Angle::ZERO, PAPER_VISIBILITY_ALPHA0)],
            phase_offset: Angle::pi(1.0),
            drift_sigma: 0.0,
            alphas: vec![Angle::ZERO, Angle::pi(0.5), Angle::pi(1.0), Angle::pi(1.5)],
            chi_points: DEFAULT_CHI_POINTS,
            repetitions: DEFAULT_REPETITIONS,
            out: PathBuf::from("out"),
            sign_convention: SignConvention::default().index(),
            alpha1: Angle::pi(0.5),
            alpha2: Angle::ZERO,
            chi1: Angle::pi(0.79),
            chi2: Angle::pi(1.29),
            threshold_visibilities: (0..=20).map(|k| k as f64 / 20.0).collect(),
            threshold_rate: 1e5,
            lhv_shots: 100_000,
        }
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl RunConfig {
    pub fn parse(text: &str, source: &Path) -> CliResult<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fail = |msg: String| CliError::parse(source, line_no, msg);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| fail(format!("expected 'key = value', got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(fail(format!("duplicate key '{key}'")));
            }
            cfg.set(key, value).map_err(fail)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("invalid value '{v}' for '{key}'"))
        }
        fn angle(v: &str) -> Result<Angle, String> {
            v.parse::<Angle>().map_err(|e| e.to_string())
        }
        match key {
            "seed" => self.seed = num(key, value)?,
            "mean_rate" => self.mean_rate = num(key, value)?,
            "default_visibility" => self.default_visibility = num(key, value)?,
            "visibility" => {
                self.visibility = split_list(value)
                    .map(|item| {
                        let (a, v) = item
                            .split_once(':')
                            .ok_or_else(|| format!("visibility entry '{item}' must be 'angle:value'"))?;
                        Ok((angle(a)?, num(key, v.trim())?))
                    })
                    .collect::<Result<_, String>>()?;
            }
            "phase_offset" => self.phase_offset = angle(value)?,
            "drift_sigma" => self.drift_sigma = num(key, value)?,
            "alphas" => self.alphas = split_list(value).map(angle).collect::<Result<_, _>>()?,
            "chi_points" => self.chi_points = num(key, value)?,
            "repetitions" => self.repetitions = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "sign_convention" => self.sign_convention = num(key, value)?,
            "alpha1" => self.alpha1 = angle(value)?,
            "alpha2" => self.alpha2 = angle(value)?,
            "chi1" => self.chi1 = angle(value)?,
            "chi2" => self.chi2 = angle(value)?,
            "threshold_visibilities" => {
                self.threshold_visibilities = split_list(value).map(|v| num(key, v)).collect::<Result<_, _>>()?
            }
            "threshold_rate" => self.threshold_rate = num(key, value)?,
            "lhv_shots" => self.lhv_shots = num(key, value)?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Checks every field against the model's own constructors.
    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        self.apparatus()?;
        self.chsh_settings()?;
        self.convention()?;
        if self.alphas.is_empty() {
            return bad("alphas must not be empty".into());
        }
        if self.chi_points == 0 {
            return bad("chi_points must be at least 1".into());
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if !(self.drift_sigma.is_finite() && self.drift_sigma >= 0.0) {
            return bad(format!("drift_sigma must be finite and >= 0, got {}", self.drift_sigma));
        }
        if let Some(v) = self.threshold_visibilities.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return bad(format!("threshold visibilities must lie in [0, 1], got {v}"));
        }
        if !(self.threshold_rate.is_finite() && self.threshold_rate > 0.0) {
            return bad(format!("threshold_rate must be positive, got {}", self.threshold_rate));
        }
        if self.lhv_shots == 0 {
            return bad("lhv_shots must be at least 1".into());
        }
        if self.out.as_os_str().is_empty() {
            return bad("out must not be empty".into());
        }
        Ok(())
    }

    pub fn apparatus(&self) -> CliResult<ApparatusModel> {
        let mut model = ApparatusModel::new(self.mean_rate, self.default_visibility, self.phase_offset.radians())?;
        for &(a, v) in &self.visibility {
            model = model.with_visibility(a.radians(), v)?;
        }
        Ok(model)
    }

    pub fn chsh_settings(&self) -> CliResult<ChshSettings> {
        Ok(ChshSettings::new(
            self.alpha1.radians(),
            self.alpha2.radians(),
            self.chi1.radians(),
            self.chi2.radians(),
        )?)
    }

    pub fn convention(&self) -> CliResult<SignConvention> {
        Ok(SignConvention::new(self.sign_convention)?)
    }

    pub fn alpha_radians(&self) -> Vec<f64> {
        self.alphas.iter().map(|a| a.radians()).collect()
    }

    /// Canonical text form; parses back to an equal value.
    pub fn to_text(&self) -> String {
        let vis: Vec<String> = self.visibility.iter().map(|(a, v)| format!("{a}:{v}")).collect();
        [
            format!("seed = {}", self.seed),
            format!("mean_rate = {}", self.mean_rate),
            format!("default_visibility = {}", self.default_visibility),
            format!("visibility = {}", vis.join(", ")),
            format!("phase_offset = {}", self.phase_offset),
            format!("drift_sigma = {}", self.drift_sigma),
            format!("alphas = {}", join(&self.alphas)),
            format!("chi_points = {}", self.chi_points),
            format!("repetitions = {}", self.repetitions),
            format!("out = {}", self.out.display()),
            format!("sign_convention = {}", self.sign_convention),
            format!("alpha1 = {}", self.alpha1),
            format!("alpha2 = {}", self.alpha2),
            format!("chi1 = {}", self.chi1),
            format!("chi2 = {}", self.chi2),
            format!("threshold_visibilities = {}", join(&self.threshold_visibilities)),
            format!("threshold_rate = {}", self.threshold_rate),
            format!("lhv_shots = {}", self.lhv_shots),
        ]
        .iter()
        .map(|l| format!("{l}\n"))
        .collect()
    }

    /// Hex SHA-256 of [`RunConfig::to_text`].
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_text().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
