//! Output directories, artifact hashing and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Everything needed to regenerate the artifacts of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Full argument vector, program name excluded.
    pub args: Vec<String>,
    pub master_seed: u64,
    pub out_dir: PathBuf,
    pub env_config_hash: String,
    /// Input files and the SHA-256 of their contents.
    pub inputs: IndexMap<String, String>,
    /// Files written to `out_dir` and the SHA-256 of their contents.
    pub artifacts: IndexMap<String, String>,
    pub record_format: String,
    pub checkpoint_format: String,
}

/// An output directory that records a hash for every file written into it.
pub struct OutDir {
    dir: PathBuf,
    artifacts: IndexMap<String, String>,
    inputs: IndexMap<String, String>,
}

impl OutDir {
    /// Creates `dir`, refusing to reuse a non-empty directory unless `force`.
    pub fn prepare(dir: &Path, force: bool) -> Result<Self> {
        if dir.exists() {
            let occupied = fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?.next().is_some();
            if occupied && !force {
                bail!("output directory {} is not empty; pass --force to overwrite", dir.display());
            }
        }
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(OutDir { dir: dir.to_path_buf(), artifacts: IndexMap::new(), inputs: IndexMap::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.artifacts.insert(name.to_string(), sha256_hex(bytes));
        log::info!("wrote {}", path.display());
        Ok(())
    }

    pub fn input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.insert(path.display().to_string(), sha256_hex(bytes));
    }

    pub fn finish(self, command: &str, master_seed: u64, env_config_hash: String) -> Result<RunManifest> {
        let manifest = RunManifest {
            tool: "legalsim".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            master_seed,
            out_dir: self.dir.clone(),
            env_config_hash,
            inputs: self.inputs,
            artifacts: self.artifacts,
            record_format: "legalsim-jsonl/1".to_string(),
            checkpoint_format: format!(
                "{}/{}",
                legalsim::learning::checkpoint::FORMAT,
                legalsim::learning::checkpoint::VERSION
            ),
        };
        let text = serde_json::to_string_pretty(&manifest)?;
        fs::write(self.dir.join(MANIFEST), text)?;
        Ok(manifest)
    }
}

pub fn read_input(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}
