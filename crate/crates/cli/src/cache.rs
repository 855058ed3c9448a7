//! Content-addressed result cache. An entry is a directory named by the
//! config hash holding the output files and a manifest of their digests.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const CACHE_ENV: &str = "KAZHDAN_LAB_CACHE";
const MANIFEST: &str = "manifest.json";

#[derive(Debug)]
pub enum CacheError {
    Io(io::Error),
    Corrupt { entry: PathBuf, reason: String },
}

impl std::fmt::Display for CacheError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CacheError::Io(e) => write!(f, "cache i/o error: {e}"),
            CacheError::Corrupt { entry, reason } => {
                write!(f, "corrupt cache entry {}: {reason}", entry.display())
            }
        }
    }
}

impl From<io::Error> for CacheError {
    fn from(e: io::Error) -> Self {
        CacheError::Io(e)
    }
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    config_hash: String,
    files: BTreeMap<String, String>,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `$KAZHDAN_LAB_CACHE`, else the user cache directory.
pub fn default_dir() -> PathBuf {
    if let Some(d) = std::env::var_os(CACHE_ENV) {
        return PathBuf::from(d);
    }
    if let Some(d) = std::env::var_os("XDG_CACHE_HOME") {
        return PathBuf::from(d).join("kazhdan-lab");
    }
    match std::env::var_os("HOME") {
        Some(h) => PathBuf::from(h).join(".cache").join("kazhdan-lab"),
        None => PathBuf::from(".kazhdan-lab-cache"),
    }
}

pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    fn entry(&self, key: &str) -> PathBuf {
        self.root.join(key)
    }

    /// Stored files for `key`, verified against the manifest. `Ok(None)`
    /// when there is no entry.
    pub fn get(&self, key: &str) -> Result<Option<BTreeMap<String, Vec<u8>>>, CacheError> {
        let dir = self.entry(key);
        let manifest_path = dir.join(MANIFEST);
        if !manifest_path.exists() {
            return Ok(None);
        }
        let corrupt = |reason: String| CacheError::Corrupt {
            entry: dir.clone(),
            reason,
        };
        let manifest: Manifest = serde_json::from_slice(&fs::read(&manifest_path)?)
            .map_err(|e| corrupt(format!("unreadable manifest: {e}")))?;
        if manifest.config_hash != key {
            return Err(corrupt(format!("manifest is for {}", manifest.config_hash)));
        }
        let mut files = BTreeMap::new();
        for (name, expected) in &manifest.files {
            let bytes = fs::read(dir.join(name)).map_err(|e| corrupt(format!("{name}: {e}")))?;
            if &digest(&bytes) != expected {
                return Err(corrupt(format!("digest mismatch for {name}")));
            }
            files.insert(name.clone(), bytes);
        }
        Ok(Some(files))
    }

    /// Stores the files; the manifest is written last so a partial entry
    /// is never read back.
    pub fn put(&self, key: &str, files: &BTreeMap<String, Vec<u8>>) -> Result<(), CacheError> {
        let dir = self.entry(key);
        fs::create_dir_all(&dir)?;
        for (name, bytes) in files {
            fs::write(dir.join(name), bytes)?;
        }
        let manifest = Manifest {
            config_hash: key.to_owned(),
            files: files.iter().map(|(n, b)| (n.clone(), digest(b))).collect(),
        };
        let tmp = dir.join(format!("{MANIFEST}.tmp"));
        fs::write(
            &tmp,
            serde_json::to_vec_pretty(&manifest).expect("manifest serializes"),
        )?;
        fs::rename(tmp, dir.join(MANIFEST))?;
        Ok(())
    }

    pub fn root(&self) -> &Path {
        &self.root
    }
}
