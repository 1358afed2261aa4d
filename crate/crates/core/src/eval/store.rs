use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::suite::RunRecord;
use crate::seed::sha256_hex;

/// Environment variable naming the store root.
pub const STORE_ENV: &str = "DESKBENCH_STORE";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("run {0} already exists; pass the overwrite flag to replace it")]
    Exists(String),
    #[error("run {0} not found")]
    Missing(String),
    #[error("stored run {key} is corrupt: {reason}")]
    Corrupt { key: String, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Store key from suite hash, agent id and base seed.
pub fn run_key(suite_hash: &str, agent: &str, seed: u64) -> String {
    sha256_hex(format!("{suite_hash}\n{agent}\n{seed}").as_bytes())[..32].to_string()
}

#[derive(Serialize, Deserialize)]
struct StoredRun {
    key: String,
    checksum: String,
    record: RunRecord,
}

fn checksum(record: &RunRecord) -> String {
    sha256_hex(&serde_json::to_vec(record).expect("record serializes"))
}

/// Directory of run records, one JSON file per key.
#[derive(Debug, Clone)]
pub struct RunStore {
    root: PathBuf,
}

impl RunStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path_of(&self, key: &str) -> PathBuf {
        self.root.join("runs").join(format!("{key}.json"))
    }

    pub fn save(&self, record: &RunRecord, overwrite: bool) -> Result<PathBuf, StoreError> {
        let key = record.key();
        let path = self.path_of(&key);
        if path.exists() && !overwrite {
            return Err(StoreError::Exists(key));
        }
        fs::create_dir_all(path.parent().expect("runs directory"))?;
        let stored = StoredRun {
            checksum: checksum(record),
            key,
            record: record.clone(),
        };
        let mut text = serde_json::to_string_pretty(&stored).expect("stored run serializes");
        text.push('\n');
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, text)?;
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    pub fn load(&self, key: &str) -> Result<RunRecord, StoreError> {
        let path = self.path_of(key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(StoreError::Missing(key.to_string())),
            Err(e) => return Err(e.into()),
        };
        let corrupt = |reason: String| StoreError::Corrupt {
            key: key.to_string(),
            reason,
        };
        let stored: StoredRun = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
        if stored.key != key || stored.record.key() != key {
            return Err(corrupt("key does not match contents".into()));
        }
        if checksum(&stored.record) != stored.checksum {
            return Err(corrupt("checksum mismatch".into()));
        }
        Ok(stored.record)
    }

    /// Keys of all stored runs, sorted.
    pub fn keys(&self) -> Result<Vec<String>, StoreError> {
        let dir = self.root.join("runs");
        if !dir.exists() {
            return Ok(Vec::new());
        }
        let mut keys = Vec::new();
        for entry in fs::read_dir(dir)? {
            let name = entry?.file_name().to_string_lossy().into_owned();
            if let Some(k) = name.strip_suffix(".json") {
                keys.push(k.to_string());
            }
        }
        keys.sort();
        Ok(keys)
    }
}
