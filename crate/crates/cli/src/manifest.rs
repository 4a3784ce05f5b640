//! Run manifests: the fully materialized command, a content hash of its input
//! data and the artifacts it produced. A manifest is enough to reproduce the
//! run with `gradkit rerun`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::output::write_atomic;
use crate::{Command, Failure};

pub const FILE_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DataFingerprint {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub tool: String,
    /// The command with every default filled in. Output locations are
    /// blanked; `rerun` supplies its own.
    pub invocation: Command,
    pub data: Option<DataFingerprint>,
    pub seed: Option<u64>,
    pub artifacts: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl DataFingerprint {
    pub fn of(path: &Path, bytes: &[u8]) -> Self {
        DataFingerprint {
            path: path.to_path_buf(),
            sha256: sha256_hex(bytes),
        }
    }

    pub fn verify(&self) -> Result<(), Failure> {
        let bytes = fs::read(&self.path).map_err(|e| Failure::io(&self.path, e))?;
        let actual = sha256_hex(&bytes);
        if actual != self.sha256 {
            return Err(Failure::Data(format!(
                "{} changed since the manifest was written (sha256 {actual}, expected {})",
                self.path.display(),
                self.sha256
            )));
        }
        Ok(())
    }
}

impl RunManifest {
    pub fn new(invocation: Command, data: Option<DataFingerprint>, seed: Option<u64>, artifacts: Vec<String>) -> Self {
        RunManifest {
            tool: format!("gradkit {}", env!("CARGO_PKG_VERSION")),
            invocation,
            data,
            seed,
            artifacts,
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), Failure> {
        let mut json = serde_json::to_string_pretty(self).map_err(|e| Failure::Data(e.to_string()))?;
        json.push('\n');
        write_atomic(path, json.as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Failure::Data(format!("{}: not a run manifest: {e}", path.display())))
    }
}
