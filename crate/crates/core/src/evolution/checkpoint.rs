//! Checkpoints: everything needed to continue a run exactly where it
//! stopped. Breeding streams are derived from (master seed, generation), so
//! the generation index stands in for generator state.

use super::log::EvolutionLog;
use super::BestSoFar;
use crate::fitness::FitnessBreakdown;
use crate::genome::Genome;
use crate::serial;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub config_digest: String,
    pub master_seed: u64,
    /// Index of the next generation to evaluate.
    pub generation: usize,
    pub population: Vec<Genome>,
    /// Fitness by genome digest.
    pub cache: BTreeMap<String, FitnessBreakdown>,
    pub log: EvolutionLog,
    pub best: Option<BestSoFar>,
}

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: corrupt checkpoint: {source}")]
    Corrupt { path: PathBuf, source: serde_json::Error },
    #[error("{path}: unsupported checkpoint format_version {found}")]
    Version { path: PathBuf, found: u32 },
    #[error("{path}: checkpoint was written for config {found}, current config digest is {expected}")]
    DigestMismatch { path: PathBuf, expected: String, found: String },
}

pub fn save_checkpoint(checkpoint: &Checkpoint, path: &Path) -> Result<(), CheckpointError> {
    let tmp = path.with_extension("tmp");
    let io = |source| CheckpointError::Io { path: path.to_path_buf(), source };
    fs::write(&tmp, serial::to_json_text(checkpoint)).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

/// Reads a checkpoint and checks it belongs to the config with
/// `expected_digest`.
pub fn load_checkpoint(path: &Path, expected_digest: &str) -> Result<Checkpoint, CheckpointError> {
    let text = fs::read_to_string(path).map_err(|source| CheckpointError::Io { path: path.to_path_buf(), source })?;
    let ckpt: Checkpoint =
        serde_json::from_str(&text).map_err(|source| CheckpointError::Corrupt { path: path.to_path_buf(), source })?;
    if ckpt.format_version != CHECKPOINT_VERSION {
        return Err(CheckpointError::Version { path: path.to_path_buf(), found: ckpt.format_version });
    }
    if ckpt.config_digest != expected_digest {
        return Err(CheckpointError::DigestMismatch {
            path: path.to_path_buf(),
            expected: expected_digest.to_string(),
            found: ckpt.config_digest,
        });
    }
    Ok(ckpt)
}
