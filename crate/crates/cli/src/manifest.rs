use crate::args::Command;
use crate::error::CliError;
use compnmf_core::sampler::ChainReport;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Record of one command invocation, enough to re-run it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Command,
    /// Resolved configuration after defaults are applied.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    /// Seeds derived from the master seed, keyed by use.
    pub derived_seeds: Vec<(String, u64)>,
    pub inputs: Vec<FileDigest>,
    /// Output files relative to the output directory.
    pub outputs: Vec<FileDigest>,
    pub version: String,
    pub duration_secs: f64,
    pub chains: Vec<ChainReport>,
    pub selected_chain: Option<usize>,
}

impl RunManifest {
    pub fn new(args: &Command) -> Self {
        RunManifest {
            command: args.name().to_string(),
            args: args.clone(),
            config: serde_json::Value::Null,
            seed: None,
            derived_seeds: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_secs: 0.0,
            chains: Vec::new(),
            selected_chain: None,
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<(), CliError> {
        self.inputs.push(FileDigest {
            path: path.to_path_buf(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    /// Records digests of the named files inside `dir`.
    pub fn record_outputs(&mut self, dir: &Path, names: &[String]) -> Result<(), CliError> {
        self.outputs = names
            .iter()
            .map(|n| {
                Ok(FileDigest {
                    path: PathBuf::from(n),
                    sha256: sha256_file(&dir.join(n))?,
                })
            })
            .collect::<Result<_, CliError>>()?;
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let s = serde_json::to_string_pretty(self).map_err(|e| CliError::Other(e.to_string()))?;
        std::fs::write(dir.join(MANIFEST_FILE), s + "\n").map_err(|e| CliError::io(dir.join(MANIFEST_FILE), e))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let s = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&s).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
    }
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
