//! Run configuration files: a GA config plus output settings, as JSON.

use crate::evolution::GaConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const DEFAULT_CHECKPOINT_EVERY: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    #[serde(flatten)]
    pub ga: GaConfig,
    pub out_dir: Option<PathBuf>,
    /// Write a checkpoint every this many generations; 0 disables.
    pub checkpoint_every: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { ga: GaConfig::default(), out_dir: None, checkpoint_every: DEFAULT_CHECKPOINT_EVERY }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("config: unknown key(s): {0}")]
    UnknownKeys(String),
    #[error("config: {0}")]
    Invalid(String),
}

impl RunConfig {
    /// Parses and validates a config document. Nested objects reject unknown
    /// keys through serde; top-level keys are checked here because the GA
    /// fields are flattened in.
    pub fn from_json(text: &str) -> Result<RunConfig, ConfigError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let known = serde_json::to_value(RunConfig::default()).expect("default config serializes");
        if let (Some(given), Some(known)) = (value.as_object(), known.as_object()) {
            let unknown: Vec<&str> = given.keys().filter(|k| !known.contains_key(*k)).map(String::as_str).collect();
            if !unknown.is_empty() {
                return Err(ConfigError::UnknownKeys(unknown.join(", ")));
            }
        }
        let config: RunConfig = serde_json::from_value(value)?;
        config.ga.validate().map_err(ConfigError::Invalid)?;
        config.ga.task_specs().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        RunConfig::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::TaskEntry;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::from_json(r#"{"population_size": 8, "generations": 3, "tasks": ["blobs"]}"#).unwrap();
        assert_eq!(c.ga.population_size, 8);
        assert_eq!(c.ga.tournament_k, 4);
        assert_eq!(c.checkpoint_every, 5);
        assert_eq!(c.ga.tasks, vec![TaskEntry::Builtin("blobs".into())]);
    }

    #[test]
    fn custom_task_entries_parse() {
        let c = RunConfig::from_json(
            r#"{"tasks": ["mnist", {"name": "b2", "source": {"blobs": {"seed": 1, "n_per_class": 20,
                 "dim": 2, "classes": 2, "sigma": 0.1}}, "hidden_width": 4, "batch_size": 8, "steps": 10}]}"#,
        )
        .unwrap();
        let specs = c.ga.task_specs().unwrap();
        assert_eq!(specs[1].name, "b2");
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = RunConfig::from_json(r#"{"population_size": 8, "popsize": 3}"#).unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKeys(ref k) if k == "popsize"));
        assert!(RunConfig::from_json(r#"{"mutation": {"numeric": [0.1, 0.1], "extra": 1}}"#).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(matches!(RunConfig::from_json(r#"{"population_size": 2}"#), Err(ConfigError::Invalid(_))));
        assert!(matches!(RunConfig::from_json(r#"{"tasks": ["imagenet"]}"#), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn readme_example_parses() {
        let readme = include_str!("../../../README.md");
        let section = &readme[readme.find("### Run configuration").unwrap()..];
        let start = section.find("```json\n").unwrap() + 8;
        let end = start + section[start..].find("```").unwrap();
        let c = RunConfig::from_json(&section[start..end]).unwrap();
        assert_eq!(c.ga.task_specs().unwrap().len(), 3);
        assert_eq!(c.out_dir.as_deref(), Some(std::path::Path::new("results")));
    }
}
