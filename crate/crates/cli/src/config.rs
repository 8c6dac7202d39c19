//! Run configuration shared by every subcommand.
//!
//! A config file supplies defaults; flags given on the command line always
//! win. The file is plain JSON with every field optional, so a file written
//! for one command can be reused for another where the fields overlap.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use tailgauge::inference::Family;
use tailgauge::{Error, Result};

/// File-backed run settings. Every field is optional: `None` means "not set
/// here", and the caller falls back to the command-line flag or the built-in
/// default.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Which subcommand the file was written for; checked when present.
    pub command: Option<String>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Radial quantile level of the rolling threshold.
    pub tau: Option<f64>,
    pub families: Option<Vec<Family>>,
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub n: Option<usize>,
    pub threads: Option<usize>,
    /// Quantile levels for the chi-by-quantile curve.
    pub u_grid: Option<Vec<f64>>,
    pub scenario: Option<String>,
    pub structure: Option<String>,
    pub ranks: Option<bool>,
    pub n_sim: Option<usize>,
    /// Gauge parameters for commands that build a gauge directly.
    pub params: Option<Vec<f64>>,
    /// Number of grid points for level-set export.
    pub grid: Option<usize>,
    pub x_lo: Option<f64>,
    pub x_hi: Option<f64>,
    pub y_lo: Option<f64>,
    pub y_hi: Option<f64>,
}

impl RunConfig {
    /// Loads a config file, or an empty config when no path is given.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("config file {}: {e}", path.display())))
    }

    /// Rejects a file written for a different subcommand.
    pub fn ensure_command(&self, name: &str) -> Result<()> {
        match &self.command {
            Some(c) if c != name => Err(Error::Domain(format!(
                "config file is for command '{c}', but '{name}' was invoked"
            ))),
            _ => Ok(()),
        }
    }
}

/// Flag value if given, else the config-file value, else the default.
pub fn pick<T: Clone>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Flag value if given, else the config-file value.
pub fn pick_opt<T: Clone>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_path_gives_defaults() {
        let cfg = RunConfig::load(None).unwrap();
        assert!(cfg.tau.is_none() && cfg.families.is_none());
    }

    #[test]
    fn roundtrips_through_json() {
        let cfg = RunConfig {
            command: Some("fit".into()),
            tau: Some(0.9),
            families: Some(vec![Family::MaxMin, Family::ExpGa]),
            seed: Some(42),
            ..RunConfig::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.tau, Some(0.9));
        assert_eq!(back.seed, Some(42));
        assert_eq!(back.families.as_deref(), Some(&[Family::MaxMin, Family::ExpGa][..]));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = serde_json::from_str::<RunConfig>("{\"taau\": 0.9}");
        assert!(err.is_err());
    }

    #[test]
    fn command_mismatch_is_an_error() {
        let cfg = RunConfig { command: Some("gen".into()), ..RunConfig::default() };
        assert!(cfg.ensure_command("gen").is_ok());
        assert!(cfg.ensure_command("fit").is_err());
    }

    #[test]
    fn flags_override_file_values() {
        assert_eq!(pick(Some(1), Some(2), 3), 1);
        assert_eq!(pick(None, Some(2), 3), 2);
        assert_eq!(pick::<i32>(None, None, 3), 3);
        assert_eq!(pick_opt(Some(1), Some(2)), Some(1));
        assert_eq!(pick_opt::<i32>(None, None), None);
    }
}
