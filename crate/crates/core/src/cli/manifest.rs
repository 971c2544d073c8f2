use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Provenance record written next to every output artifact as
/// `<artifact>.manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub version: String,
    pub inputs: Vec<InputDigest>,
    pub started_at: String,
    pub finished_at: String,
}

fn stamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects inputs while a command runs, then stamps outputs.
pub struct ManifestBuilder {
    command: String,
    args: Vec<String>,
    seed: Option<u64>,
    inputs: Vec<InputDigest>,
    started: DateTime<Utc>,
}

impl ManifestBuilder {
    pub fn new(command: &str, args: Vec<String>) -> Self {
        ManifestBuilder {
            command: command.into(),
            args,
            seed: None,
            inputs: Vec::new(),
            started: Utc::now(),
        }
    }

    pub fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    pub fn input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(InputDigest {
            path: path.to_path_buf(),
            sha256: sha256_hex(bytes),
        });
    }

    pub fn finish(&self) -> RunManifest {
        RunManifest {
            command: self.command.clone(),
            args: self.args.clone(),
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").into(),
            inputs: self.inputs.clone(),
            started_at: stamp(self.started),
            finished_at: stamp(Utc::now()),
        }
    }

    /// Write `<artifact>.manifest.json`.
    pub fn write_for(&self, artifact: &Path) -> Result<()> {
        let mut name = artifact.as_os_str().to_owned();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        let text = serde_json::to_string_pretty(&self.finish())?;
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
