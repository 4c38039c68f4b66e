//! Run manifests: a digest-backed record of every artifact a command wrote.

use ionsim_core::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// One output file with the SHA-256 digest of its bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
}

/// Summary of a completed command run. All data artifacts are listed with
/// content digests; identical (config, seed) inputs reproduce identical
/// digests regardless of thread count. The manifest itself contains the
/// wall-clock duration and is therefore not byte-reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<String>,
    pub seed: u64,
    pub out_dir: String,
    pub tool_version: String,
    pub wall_seconds: f64,
    pub outputs: Vec<OutputDigest>,
}

/// Collects artifacts for one command run: writes files under the output
/// directory, records digests, and emits the manifest last.
pub struct ArtifactWriter {
    out_dir: PathBuf,
    command: String,
    config_path: Option<String>,
    seed: u64,
    started: Instant,
    outputs: Vec<OutputDigest>,
}

impl ArtifactWriter {
    pub fn new(out_dir: &Path, command: &str, config_path: Option<&Path>, seed: u64) -> Result<Self> {
        fs::create_dir_all(out_dir).map_err(|e| {
            Error::Numerical(format!(
                "cannot create output directory {}: {e}",
                out_dir.display()
            ))
        })?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            command: command.to_string(),
            config_path: config_path.map(|p| p.display().to_string()),
            seed,
            started: Instant::now(),
            outputs: Vec::new(),
        })
    }

    /// Write one artifact and record its digest.
    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.out_dir.join(name);
        fs::write(&path, bytes)
            .map_err(|e| Error::Numerical(format!("cannot write {}: {e}", path.display())))?;
        let digest = Sha256::digest(bytes);
        self.outputs.push(OutputDigest {
            path: name.to_string(),
            sha256: format!("{digest:x}"),
        });
        Ok(())
    }

    /// Serialize a value as pretty JSON (newline-terminated) and write it.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::Numerical(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Write the manifest (always named `manifest.json`) and finish.
    pub fn finish(self) -> Result<RunManifest> {
        let manifest = RunManifest {
            command: self.command,
            config_path: self.config_path,
            seed: self.seed,
            out_dir: self.out_dir.display().to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_seconds: self.started.elapsed().as_secs_f64(),
            outputs: self.outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::Numerical(format!("cannot serialize manifest: {e}")))?;
        text.push('\n');
        let path = self.out_dir.join("manifest.json");
        fs::write(&path, text)
            .map_err(|e| Error::Numerical(format!("cannot write {}: {e}", path.display())))?;
        Ok(manifest)
    }
}
