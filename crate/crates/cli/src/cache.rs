//! Content-addressed store of genus enumerations with a fail-fast
//! directory lock.

use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use genuslab_core::canonical::MAX_CANONICAL_DIM;
use genuslab_core::genus::{GenusEnumeration, GenusPolicy};
use genuslab_core::{canonical_form, lll_reduce, QuadraticForm};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const CACHE_FORMAT_VERSION: u32 = 1;
const LOCK_FILE: &str = ".lock";

#[derive(Serialize, Deserialize)]
struct Artifact {
    version: u32,
    key: String,
    enumeration: GenusEnumeration,
}

/// Digest of the canonical form of `q` and the policy.
pub fn cache_key(q: &QuadraticForm, policy: &GenusPolicy) -> Result<String, CliError> {
    let rep = if q.dim() <= MAX_CANONICAL_DIM {
        canonical_form(q).map_err(CliError::from)?.canonical
    } else {
        lll_reduce(q).canonical
    };
    let policy_json = serde_json::to_string(policy).expect("policy serializes");
    let mut h = Sha256::new();
    h.update(format!("v{CACHE_FORMAT_VERSION}\n{}\n{policy_json}", rep.to_text()).as_bytes());
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Exclusive handle on a cache directory, released on drop.
pub struct Cache {
    dir: PathBuf,
    pub hits: usize,
    pub misses: usize,
}

impl Cache {
    pub fn open(dir: &Path) -> Result<Cache, CliError> {
        fs::create_dir_all(dir.join("genus"))
            .map_err(|e| CliError::runtime(format!("cannot create cache {}: {e}", dir.display())))?;
        let lock = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
            }
            Err(e) if e.kind() == ErrorKind::AlreadyExists => {
                return Err(CliError::runtime(format!(
                    "cache {} is locked by another process (remove {} if it is stale)",
                    dir.display(),
                    lock.display()
                )))
            }
            Err(e) => return Err(CliError::runtime(format!("cannot lock cache {}: {e}", dir.display()))),
        }
        Ok(Cache { dir: dir.to_path_buf(), hits: 0, misses: 0 })
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join("genus").join(format!("{key}.json"))
    }

    pub fn get(&mut self, key: &str) -> Option<GenusEnumeration> {
        let found = self.read(key);
        match found {
            Some(_) => self.hits += 1,
            None => self.misses += 1,
        }
        found
    }

    fn read(&self, key: &str) -> Option<GenusEnumeration> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        let art: Artifact = serde_json::from_str(&text).ok()?;
        if art.version != CACHE_FORMAT_VERSION || art.key != key {
            return None;
        }
        Some(art.enumeration)
    }

    pub fn put(&self, key: &str, g: &GenusEnumeration) -> Result<(), CliError> {
        let art = Artifact { version: CACHE_FORMAT_VERSION, key: key.to_string(), enumeration: g.clone() };
        let text = serde_json::to_string_pretty(&art).expect("artifact serializes");
        let tmp = self.dir.join("genus").join(format!("{key}.tmp"));
        fs::write(&tmp, text + "\n")
            .and_then(|_| fs::rename(&tmp, self.path(key)))
            .map_err(|e| CliError::runtime(format!("cannot write cache entry: {e}")))
    }

    pub fn artifact_path(&self, key: &str) -> PathBuf {
        self.path(key)
    }

    /// Removes entries that are unreadable or from another format version.
    pub fn gc(&self) -> Result<(usize, usize), CliError> {
        let (mut kept, mut removed) = (0, 0);
        let entries = fs::read_dir(self.dir.join("genus")).map_err(|e| CliError::runtime(e.to_string()))?;
        for entry in entries.flatten() {
            let path = entry.path();
            let valid = path.extension().is_some_and(|e| e == "json")
                && fs::read_to_string(&path)
                    .ok()
                    .and_then(|t| serde_json::from_str::<Artifact>(&t).ok())
                    .is_some_and(|a| a.version == CACHE_FORMAT_VERSION);
            if valid {
                kept += 1;
            } else {
                fs::remove_file(&path).map_err(|e| CliError::runtime(e.to_string()))?;
                removed += 1;
            }
        }
        Ok((kept, removed))
    }
}

impl Drop for Cache {
    fn drop(&mut self) {
        let _ = fs::remove_file(self.dir.join(LOCK_FILE));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equivalent_seeds_share_a_key() {
        let p = GenusPolicy::default();
        let a = QuadraticForm::diagonal(&[1, 2, 3]).unwrap();
        let b = QuadraticForm::new(vec![vec![3, 0, 0], vec![0, 1, 1], vec![0, 1, 3]]).unwrap();
        assert_eq!(cache_key(&a, &p).unwrap(), cache_key(&b, &p).unwrap());
        let other = GenusPolicy { p_max: 40, ..p.clone() };
        assert_ne!(cache_key(&a, &p).unwrap(), cache_key(&a, &other).unwrap());
    }

    #[test]
    fn lock_is_exclusive() {
        let dir = tempfile::tempdir().unwrap();
        let first = Cache::open(dir.path()).unwrap();
        assert!(Cache::open(dir.path()).is_err());
        drop(first);
        assert!(Cache::open(dir.path()).is_ok());
    }
}
