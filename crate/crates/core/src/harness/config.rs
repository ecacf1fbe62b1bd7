use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knowledge::Parameters;
use crate::scenarios::Variant;

/// Steps per run when not configured; the allotted time frame of a sweep cell.
pub const DEFAULT_MAX_STEPS: u64 = 200;
/// Card presentations before a WCST run is declared incomplete.
pub const DEFAULT_WCST_CAP: u64 = 600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ScenarioKind {
    #[default]
    Example,
    Wcst,
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "example" => Ok(ScenarioKind::Example),
            "wcst" => Ok(ScenarioKind::Wcst),
            other => Err(Error::Config(format!("unknown scenario `{other}`"))),
        }
    }
}

/// Order in which object kinds are presented in the example scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresentationOrder {
    /// A seeded permutation of the six kinds, repeated.
    #[default]
    RoundRobin,
    /// An independent seeded draw of the kind at every step.
    Shuffled,
}

impl FromStr for PresentationOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "round-robin" | "roundrobin" => Ok(PresentationOrder::RoundRobin),
            "shuffled" | "random" => Ok(PresentationOrder::Shuffled),
            other => Err(Error::Config(format!("unknown presentation order `{other}`"))),
        }
    }
}

/// Scenario configuration, also the on-disk config file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub scenario: ScenarioKind,
    #[serde(default)]
    pub variant: Variant,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
    #[serde(default)]
    pub order: PresentationOrder,
    #[serde(default)]
    pub parameters: Parameters,
}

fn default_max_steps() -> u64 {
    DEFAULT_MAX_STEPS
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioKind::Example,
            variant: Variant::Exact,
            seed: 0,
            max_steps: DEFAULT_MAX_STEPS,
            order: PresentationOrder::RoundRobin,
            parameters: Parameters::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.parameters.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_defaults() {
        let c = ScenarioConfig::from_json(r#"{"scenario": "example", "variant": "noisy", "seed": 9}"#).unwrap();
        assert_eq!(c.variant, Variant::Noisy);
        assert_eq!(c.seed, 9);
        assert_eq!(c.max_steps, DEFAULT_MAX_STEPS);
        assert_eq!(c.order, PresentationOrder::RoundRobin);
    }

    #[test]
    fn config_file_rejects_bad_values() {
        assert!(ScenarioConfig::from_json(
            r#"{"parameters": {"rhoRa": 2, "deltaAw": 0.1, "thetaMc": 1, "thetaMf": 0.3}}"#
        )
        .is_err());
        assert!(ScenarioConfig::from_json(r#"{"scenario": "chess"}"#).is_err());
        assert!(ScenarioConfig::from_json(r#"{"unknown": 1}"#).is_err());
    }
}
