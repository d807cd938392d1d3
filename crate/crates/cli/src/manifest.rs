//! Run manifests: what was read, what was written, and their digests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub parameters: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub warnings: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects inputs and writes outputs into one directory, then records both.
pub struct Run {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Run {
    pub fn new(command: &str, dir: &Path, parameters: serde_json::Value) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: RunManifest {
                command: command.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                parameters,
                inputs: Vec::new(),
                outputs: Vec::new(),
                warnings: 0,
                notes: Vec::new(),
            },
        })
    }

    pub fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
        self.manifest.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: digest(text.as_bytes()),
        });
        Ok(text)
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents)
            .map_err(|e| CliError::numerical(format!("cannot write {}: {e}", path.display())))?;
        self.manifest.outputs.push(FileDigest {
            path: name.to_string(),
            sha256: digest(contents.as_bytes()),
        });
        log::info!("wrote {}", path.display());
        Ok(())
    }

    pub fn warn(&mut self, count: usize) {
        self.manifest.warnings += count;
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.manifest.notes.push(text.into());
    }

    pub fn finish(self) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| CliError::numerical(e.to_string()))?
            + "\n";
        let path = self.dir.join("manifest.json");
        fs::write(&path, text)
            .map_err(|e| CliError::numerical(format!("cannot write {}: {e}", path.display())))
    }
}
