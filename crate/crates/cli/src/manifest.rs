//! Run manifests: enough to re-run a command and get the same model bytes.

use std::fs;
use std::path::{Path, PathBuf};

use jrme::{ModelConfig, Variant};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::failure::{CmdResult, Context};

#[derive(Debug, Serialize)]
pub struct ConfigRecord {
    pub dim: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub negatives: String,
    pub seed: u64,
    pub normalize_entities: bool,
}

impl From<&ModelConfig> for ConfigRecord {
    fn from(c: &ModelConfig) -> Self {
        ConfigRecord {
            dim: c.dim,
            alpha: c.alpha,
            beta: c.beta,
            gamma: c.gamma,
            learning_rate: c.learning_rate,
            epochs: c.epochs,
            negatives: c.neg_mode.to_string(),
            seed: c.seed,
            normalize_entities: c.normalize_entities,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct InputRecord {
    pub role: &'static str,
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub variant: String,
    pub config: ConfigRecord,
    pub threads: usize,
    pub inputs: Vec<InputRecord>,
    /// Hash over the role and digest of every input, in order.
    pub fingerprint: String,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &'static str, variant: Variant, config: &ModelConfig, threads: usize) -> Self {
        RunManifest {
            command,
            variant: variant.name().to_lowercase(),
            config: config.into(),
            threads,
            inputs: Vec::new(),
            fingerprint: String::new(),
            outputs: Vec::new(),
        }
    }

    pub fn add_input(&mut self, role: &'static str, path: &Path) -> CmdResult {
        let bytes = fs::read(path).context(format!("reading {}", path.display()))?;
        self.inputs.push(InputRecord {
            role,
            path: path.to_path_buf(),
            sha256: format!("{:x}", Sha256::digest(&bytes)),
        });
        let mut h = Sha256::new();
        for input in &self.inputs {
            h.update(input.role.as_bytes());
            h.update(b"\0");
            h.update(input.sha256.as_bytes());
            h.update(b"\n");
        }
        self.fingerprint = format!("{:x}", h.finalize());
        Ok(())
    }

    /// Writes the manifest to `<output>.manifest.json` and returns that path.
    pub fn write_next_to(&self, output: &Path) -> CmdResult<PathBuf> {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        let mut text = serde_json::to_string_pretty(self).map_err(crate::failure::Failure::data)?;
        text.push('\n');
        fs::write(&path, text).context(format!("writing {}", path.display()))?;
        Ok(path)
    }
}
