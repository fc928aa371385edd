//! Experiment configuration: registry defaults, overridden by a TOML file, overridden by flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use cei_core::Interval;
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub n: usize,
    pub paths: usize,
    pub seed: u64,
    pub epsilon: Option<f64>,
    pub interval: Option<Interval>,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub alpha: f64,
    pub out_dir: Option<PathBuf>,
    pub format: Format,
}

/// A partially specified config as read from a file or flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub experiment: Option<String>,
    pub n: Option<usize>,
    pub paths: Option<usize>,
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
    pub interval: Option<Interval>,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub alpha: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ConfigOverrides {
    pub fn from_toml_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| HarnessError::InvalidConfig(format!("{}: {e}", path.display())))
    }

    /// Fields set in `other` win.
    pub fn merge(self, other: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            experiment: other.experiment.or(self.experiment),
            n: other.n.or(self.n),
            paths: other.paths.or(self.paths),
            seed: other.seed.or(self.seed),
            epsilon: other.epsilon.or(self.epsilon),
            interval: other.interval.or(self.interval),
            x: other.x.or(self.x),
            y: other.y.or(self.y),
            alpha: other.alpha.or(self.alpha),
            out_dir: other.out_dir.or(self.out_dir),
            format: other.format.or(self.format),
        }
    }
}

impl ExperimentConfig {
    pub fn apply(mut self, o: ConfigOverrides) -> Self {
        if let Some(v) = o.experiment {
            self.experiment = v;
        }
        self.n = o.n.unwrap_or(self.n);
        self.paths = o.paths.unwrap_or(self.paths);
        self.seed = o.seed.unwrap_or(self.seed);
        self.epsilon = o.epsilon.or(self.epsilon);
        self.interval = o.interval.or(self.interval);
        self.x = o.x.or(self.x);
        self.y = o.y.or(self.y);
        self.alpha = o.alpha.unwrap_or(self.alpha);
        self.out_dir = o.out_dir.or(self.out_dir);
        self.format = o.format.unwrap_or(self.format);
        self
    }

    pub fn validate(&self, statistical: bool) -> Result<(), HarnessError> {
        if statistical && self.n < 64 {
            return Err(HarnessError::InvalidConfig(format!("n = {} < 64", self.n)));
        }
        if self.paths < 100 {
            return Err(HarnessError::InvalidConfig(format!("paths = {} < 100", self.paths)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 0.1) {
            return Err(HarnessError::InvalidConfig(format!(
                "alpha = {} outside (0, 0.1]",
                self.alpha
            )));
        }
        if let Some(e) = self.epsilon {
            if e.is_nan() || e <= 0.0 {
                return Err(HarnessError::InvalidConfig(format!("epsilon = {e}")));
            }
        }
        if let Some(iv) = self.interval {
            Interval::new(iv.lo, iv.hi, iv.lo_open, iv.hi_open)
                .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
        }
        Ok(())
    }
}

/// Parses `lo,hi` (taken as `(lo, hi]`) or a bracketed form such as `[-2,-2]` or `(-0.4,-0.1]`.
pub fn parse_interval(s: &str) -> Result<Interval, HarnessError> {
    let bad = || HarnessError::InvalidConfig(format!("cannot parse interval {s:?}"));
    let t = s.trim();
    let (lo_open, t) = match t.chars().next() {
        Some('(') => (true, &t[1..]),
        Some('[') => (false, &t[1..]),
        _ => (true, t),
    };
    let (hi_open, t) = match t.chars().last() {
        Some(')') => (true, &t[..t.len() - 1]),
        Some(']') => (false, &t[..t.len() - 1]),
        _ => (false, t),
    };
    let (lo, hi) = t.split_once(',').ok_or_else(bad)?;
    let lo = f64::from_str(lo.trim()).map_err(|_| bad())?;
    let hi = f64::from_str(hi.trim()).map_err(|_| bad())?;
    Interval::new(lo, hi, lo_open, hi_open).map_err(|e| HarnessError::InvalidConfig(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_forms() {
        assert_eq!(
            parse_interval("-0.4,-0.1").unwrap(),
            Interval::left_open(-0.4, -0.1).unwrap()
        );
        assert_eq!(parse_interval("[-2,-2]").unwrap(), Interval::point(-2.0).unwrap());
        assert_eq!(
            parse_interval("(-1, 0)").unwrap(),
            Interval::new(-1.0, 0.0, true, true).unwrap()
        );
        assert!(parse_interval("0,1").is_err());
        assert!(parse_interval("nope").is_err());
    }

    #[test]
    fn overrides_layer() {
        let file: ConfigOverrides = toml::from_str("n = 128\nseed = 5\nformat = \"json\"").unwrap();
        let flags = ConfigOverrides {
            seed: Some(9),
            ..Default::default()
        };
        let merged = file.merge(flags);
        assert_eq!(
            (merged.n, merged.seed, merged.format),
            (Some(128), Some(9), Some(Format::Json))
        );
        assert!(toml::from_str::<ConfigOverrides>("bogus = 1").is_err());
    }
}
