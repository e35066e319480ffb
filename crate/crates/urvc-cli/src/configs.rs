//! Config-file loading for the CLI.
//!
//! All subcommands read a single versioned TOML file, but three shapes
//! exist: the full scenario (run/sweep), the channel tradeoff curve, and
//! the power-control availability sweep. Each shape is a distinct top-level
//! schema; `validate` probes the shapes in order so one command can check
//! any bundled config.

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use urvc_core::channel::{FadingModel, LinkAbstraction};
use urvc_core::engine::{ScenarioConfig, SCHEMA_VERSION};
use urvc_core::rrm::RrmScenario;

/// Channel availability/reliability tradeoff input.
#[derive(Debug, Clone, Deserialize)]
pub struct TradeoffConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub fading: FadingModel,
    pub link: LinkAbstraction,
    /// Availability gate thresholds to evaluate, ascending.
    pub thresholds: Vec<f64>,
    /// Monte Carlo draws shared by every threshold.
    pub n_draws: u64,
}

/// Power-control availability sweep input.
#[derive(Debug, Clone, Deserialize)]
pub struct RrmSweepConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub rrm: RrmScenario,
    /// SINR targets to sweep, in dB.
    pub gammas_db: Vec<f64>,
    /// Topology drops per target.
    pub n_drops: u64,
}

/// Configuration error with enough context to fix the file.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))
}

/// Parses `path` as `T`, prefixing errors with the file name. The TOML
/// errors carry line/column positions.
fn parse<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

fn check_version(path: &Path, version: u32) -> Result<(), ConfigError> {
    if version != SCHEMA_VERSION {
        return Err(ConfigError(format!(
            "{}: schema_version is {version}, this build reads {SCHEMA_VERSION}",
            path.display()
        )));
    }
    Ok(())
}

pub fn load_scenario(path: &Path, seed_override: Option<u64>) -> Result<ScenarioConfig, ConfigError> {
    let text = read(path)?;
    let mut config: ScenarioConfig = parse(path, &text)?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    config
        .validate()
        .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    Ok(config)
}

pub fn load_tradeoff(path: &Path, seed_override: Option<u64>) -> Result<TradeoffConfig, ConfigError> {
    let text = read(path)?;
    let mut config: TradeoffConfig = parse(path, &text)?;
    check_version(path, config.schema_version)?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    let validation = config
        .fading
        .validate()
        .and_then(|()| config.link.validate())
        .and_then(|()| {
            if config.thresholds.is_empty() {
                return Err(urvc_core::Error::InvalidConfig(
                    "thresholds must not be empty".into(),
                ));
            }
            if config.n_draws == 0 {
                return Err(urvc_core::Error::InvalidConfig(
                    "n_draws must be at least 1".into(),
                ));
            }
            Ok(())
        });
    validation.map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    Ok(config)
}

pub fn load_rrm_sweep(path: &Path, seed_override: Option<u64>) -> Result<RrmSweepConfig, ConfigError> {
    let text = read(path)?;
    let mut config: RrmSweepConfig = parse(path, &text)?;
    check_version(path, config.schema_version)?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    let validation = config.rrm.validate().and_then(|()| {
        if config.gammas_db.is_empty() {
            return Err(urvc_core::Error::InvalidConfig("gammas_db must not be empty".into()));
        }
        if config.n_drops == 0 {
            return Err(urvc_core::Error::InvalidConfig("n_drops must be at least 1".into()));
        }
        Ok(())
    });
    validation.map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    Ok(config)
}

/// What `validate` recognized a file as.
pub enum ValidatedShape {
    Scenario { warnings: Vec<String> },
    Tradeoff,
    RrmSweep,
}

/// Tries the three config shapes in order. Scenario errors win the report
/// when nothing matches, since that is the primary shape.
pub fn validate_any(path: &Path) -> Result<ValidatedShape, ConfigError> {
    let text = read(path)?;
    match parse::<ScenarioConfig>(path, &text) {
        Ok(config) => {
            let warnings = config
                .validate()
                .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
            return Ok(ValidatedShape::Scenario { warnings });
        }
        Err(scenario_err) => {
            if load_tradeoff(path, None).is_ok() {
                return Ok(ValidatedShape::Tradeoff);
            }
            if load_rrm_sweep(path, None).is_ok() {
                return Ok(ValidatedShape::RrmSweep);
            }
            // Surface the dedicated-shape diagnostics when the file clearly
            // leans that way, otherwise the scenario parse error.
            if text.contains("thresholds") && text.contains("n_draws") {
                return Err(load_tradeoff(path, None).unwrap_err());
            }
            if text.contains("gammas_db") {
                return Err(load_rrm_sweep(path, None).unwrap_err());
            }
            Err(scenario_err)
        }
    }
}
