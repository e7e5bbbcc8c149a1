//! `run_manifest.json`: what a run read, how it was configured and what it wrote.
//!
//! Every input and output is recorded with its SHA-256 so a later run can
//! check that it is looking at the same bytes. The configuration is stored in
//! full alongside a hash of its canonical JSON form (keys sorted).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "run_manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// What the file was used as, e.g. `pairs` or `checkpoint`.
    pub role: String,
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Command-line arguments after the program name.
    pub args: Vec<String>,
    pub seed: u64,
    pub config: serde_json::Value,
    pub config_hash: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(sha256_hex(&bytes))
}

/// Hash of the canonical JSON encoding (object keys sorted, no whitespace).
pub fn config_hash(config: &serde_json::Value) -> String {
    sha256_hex(config.to_string().as_bytes())
}

impl RunManifest {
    pub fn new(subcommand: &str, args: Vec<String>, seed: u64, config: &impl Serialize) -> Result<Self> {
        let config = serde_json::to_value(config)?;
        Ok(RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            args,
            seed,
            config_hash: config_hash(&config),
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn add_input(&mut self, role: &str, path: impl AsRef<Path>) -> Result<()> {
        let digest = digest(role, path.as_ref())?;
        self.inputs.push(digest);
        Ok(())
    }

    pub fn add_output(&mut self, role: &str, path: impl AsRef<Path>) -> Result<()> {
        let digest = digest(role, path.as_ref())?;
        self.outputs.push(digest);
        Ok(())
    }

    /// Inputs whose current contents no longer match the recorded hash
    /// (including files that have disappeared).
    pub fn stale_inputs(&self) -> Vec<&FileDigest> {
        self.inputs
            .iter()
            .filter(|d| sha256_file(&d.path).map_or(true, |h| h != d.sha256))
            .collect()
    }

    /// Writes `run_manifest.json` into `dir` and returns its path.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let path = dir.as_ref().join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, json + "\n").map_err(|source| Error::File {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let content = crate::error::read_file(path)?;
        Ok(serde_json::from_str(&content)?)
    }
}

fn digest(role: &str, path: &Path) -> Result<FileDigest> {
    Ok(FileDigest {
        role: role.to_string(),
        path: path.to_path_buf(),
        sha256: sha256_file(path)?,
    })
}
