//! Angles as written in config files: either plain radians (`1.5`) or an
//! exact multiple of π (`0.79pi`, `pi`, `-0.25pi`).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    /// Coefficient of π.
    PiMultiple(f64),
    Radians(f64),
}

impl Angle {
    pub const ZERO: Angle = Angle::PiMultiple(0.0);

    pub fn pi(coefficient: f64) -> Self {
        Angle::PiMultiple(coefficient)
    }

    pub fn radians(self) -> f64 {
        match self {
            Angle::PiMultiple(k) => k * PI,
            Angle::Radians(r) => r,
        }
    }

    /// Adds π, staying exact for π multiples.
    pub fn plus_pi(self) -> Self {
        match self {
            Angle::PiMultiple(k) => Angle::PiMultiple(k + 1.0),
            Angle::Radians(r) => Angle::Radians(r + PI),
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::PiMultiple(k) => write!(f, "{k}pi"),
            Angle::Radians(r) => write!(f, "{r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AngleParseError(pub String);

impl fmt::Display for AngleParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid angle literal '{}'", self.0)
    }
}

impl std::error::Error for AngleParseError {}

impl FromStr for Angle {
    type Err = AngleParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let err = || AngleParseError(s.to_string());
        let value = if let Some(coef) = t.strip_suffix("pi").or_else(|| t.strip_suffix('π')) {
            let coef = coef.trim().trim_end_matches('*').trim();
            let k = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| err())?,
            };
            Angle::PiMultiple(k)
        } else {
            Angle::Radians(t.parse::<f64>().map_err(|_| err())?)
        };
        if value.radians().is_finite() {
            Ok(value)
        } else {
            Err(err())
        }
    }
}
