//! Run configuration, read from TOML.
//!
//! ```toml
//! [harness]
//! seed = 7
//!
//! [harness.grid]
//! dim = 2
//! n = 64
//!
//! [harness.moments]
//! cases = 20
//!
//! [output]
//! dir = "report"
//!
//! [prob]
//! time = 0.5
//! state = { kind = "gaussian", center = [0.3, 0.0, 0.0], width = 0.8 }
//! region = { kind = "ball", center = [0.0, 0.0, 0.0], radius = 1.0 }
//! ```
//!
//! Every key has a default and unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};

use kgpovm_core::harness::HarnessConfig;
use kgpovm_core::{Frame, GridSpec, Region, SliceRef, StateSpec, Vec3};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub harness: HarnessConfig,
    pub output: OutputConfig,
    pub prob: ProbConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write the JSON report.
    pub json: bool,
    /// Write the per-case CSV table.
    pub csv: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("kgpovm-report"),
            json: true,
            csv: true,
        }
    }
}

/// A single state, region and slice for `prob` and `export`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbConfig {
    /// Falls back to `harness.grid`.
    pub grid: Option<GridSpec>,
    pub state: StateSpec,
    /// Velocity of the frame the state is written in.
    pub state_velocity: Vec3,
    pub region: Region,
    /// Velocity of the slice frame `n'`.
    pub slice_velocity: Vec3,
    pub time: f64,
    /// Velocity of the detector frame `n₀` of the two-frame observable.
    pub generator_velocity: Vec3,
    /// Mantle export: ball centre, radii and the two slice times.
    pub mantle_center: Vec3,
    pub mantle_radii: Vec<f64>,
    pub t1: f64,
    pub t2: f64,
}

impl Default for ProbConfig {
    fn default() -> Self {
        ProbConfig {
            grid: None,
            state: StateSpec::Gaussian {
                center: [0.0; 3],
                width: 0.8,
                position: [0.0; 3],
            },
            state_velocity: [0.0; 3],
            region: Region::ball([0.0; 3], 1.0),
            slice_velocity: [0.0; 3],
            time: 0.0,
            generator_velocity: [0.0; 3],
            mantle_center: [0.0; 3],
            mantle_radii: vec![0.5, 1.0, 1.5, 2.0],
            t1: 0.0,
            t2: 1.0,
        }
    }
}

impl ProbConfig {
    pub fn state_frame(&self) -> kgpovm_core::Result<Frame> {
        Frame::from_velocity(self.state_velocity)
    }

    pub fn slice(&self) -> kgpovm_core::Result<SliceRef> {
        Ok(SliceRef::new(
            Frame::from_velocity(self.slice_velocity)?,
            self.time,
        ))
    }

    pub fn generator(&self) -> kgpovm_core::Result<Frame> {
        Frame::from_velocity(self.generator_velocity)
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Missing(PathBuf),
    Unreadable(PathBuf, std::io::Error),
    /// Parse or validation failure; the message names the key.
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Missing(p) => write!(f, "config file {} does not exist", p.display()),
            ConfigError::Unreadable(p, e) => write!(f, "cannot read {}: {e}", p.display()),
            ConfigError::Invalid(m) => write!(f, "invalid config: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => ConfigError::Missing(path.to_path_buf()),
            _ => ConfigError::Unreadable(path.to_path_buf(), e),
        })?;
        RunConfig::parse(&text)
    }

    /// Defaults when no file is given.
    pub fn load_or_default(path: Option<&Path>) -> Result<RunConfig, ConfigError> {
        match path {
            Some(p) => RunConfig::load(p),
            None => Ok(RunConfig::default()),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.harness
            .validate()
            .map_err(|e| ConfigError::Invalid(format!("harness.{}", strip_kind(&e))))?;
        let p = &self.prob;
        for (key, v) in [
            ("prob.state_velocity", p.state_velocity),
            ("prob.slice_velocity", p.slice_velocity),
            ("prob.generator_velocity", p.generator_velocity),
        ] {
            if v.iter().map(|x| x * x).sum::<f64>() >= 1.0 {
                return Err(ConfigError::Invalid(format!(
                    "{key}: speed must be below 1"
                )));
            }
        }
        if let Some(r) = p.mantle_radii.iter().find(|r| !(**r > 0.0)) {
            return Err(ConfigError::Invalid(format!(
                "prob.mantle_radii: radius {r} is not positive"
            )));
        }
        if let Some(g) = p.grid {
            g.build()
                .map_err(|e| ConfigError::Invalid(format!("prob.grid: {e}")))?;
        }
        Ok(())
    }

    pub fn prob_grid(&self) -> GridSpec {
        self.prob.grid.unwrap_or(self.harness.grid)
    }
}

/// Validation messages read "key: why" behind the error kind.
fn strip_kind(e: &kgpovm_core::Error) -> String {
    match e {
        kgpovm_core::Error::InvalidParameter(m) => m.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn doc_example_parses() {
        let text =
            "[harness]\nseed = 7\n[harness.grid]\ndim = 2\nn = 64\n[harness.moments]\ncases = 20\n\
                    [output]\ndir = \"report\"\n[prob]\ntime = 0.5\n\
                    state = { kind = \"gaussian\", center = [0.3, 0.0, 0.0], width = 0.8 }\n\
                    region = { kind = \"ball\", center = [0.0, 0.0, 0.0], radius = 1.0 }\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.harness.seed, 7);
        assert_eq!(cfg.harness.grid.dim, 2);
        assert_eq!(cfg.harness.grid.p_max, 8.0);
        assert_eq!(cfg.harness.moments.cases, 20);
        assert_eq!(cfg.prob.time, 0.5);
    }

    #[test]
    fn unknown_key_is_named_with_its_line() {
        let err = RunConfig::parse("[harness]\nseed = 1\nsed = 2\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("sed") && err.contains("line 3"), "{err}");
    }

    #[test]
    fn bad_value_is_named() {
        let err = RunConfig::parse("[harness.normalization]\ncases = 0\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("harness.normalization.cases"), "{err}");
        let err = RunConfig::parse("[prob]\nslice_velocity = [1.0, 0.0, 0.0]\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("prob.slice_velocity"), "{err}");
    }

    #[test]
    fn quick_preset_round_trips() {
        let cfg = RunConfig {
            harness: HarnessConfig::quick(),
            ..Default::default()
        };
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
    }
}
