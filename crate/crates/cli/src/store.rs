//! File-based census store: one canonical JSON file per record at
//! <root>/p<p>/d<d>/<kind>/<stem>.json, written by atomic rename.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::record::{canonical_json, parse_record, CensusRecord, RecordError, RecordKey};

pub const CACHE_ENV: &str = "EXPSUM_CACHE_DIR";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("record {0} exists with a different payload (use --force to replace)")]
    Conflict(String),
    #[error("no record at {0}")]
    NotFound(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Record { path: String, source: RecordError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PutOutcome {
    Created,
    Unchanged,
    Replaced,
}

/// --cache flag, then $EXPSUM_CACHE_DIR, then ./census.
pub fn resolve_root(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    match std::env::var_os(CACHE_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from("census"),
    }
}

pub struct Store {
    pub root: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl Store {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Store { root: root.into() }
    }

    pub fn path_for(&self, key: &RecordKey) -> PathBuf {
        self.root
            .join(format!("p{}", key.p))
            .join(format!("d{}", key.d))
            .join(&key.kind)
            .join(format!("{}.json", key.file_stem()))
    }

    pub fn get(&self, key: &RecordKey) -> Result<CensusRecord, StoreError> {
        let path = self.path_for(key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound(path.display().to_string()))
            }
            Err(e) => return Err(io_err(&path)(e)),
        };
        parse_record(&text).map_err(|source| StoreError::Record {
            path: path.display().to_string(),
            source,
        })
    }

    /// Raw stored text, for byte-level comparisons.
    pub fn get_text(&self, key: &RecordKey) -> Result<String, StoreError> {
        let path = self.path_for(key);
        fs::read_to_string(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => StoreError::NotFound(path.display().to_string()),
            _ => io_err(&path)(e),
        })
    }

    /// Same key and payload is a no-op; a different payload needs `force`.
    pub fn put(&self, rec: &CensusRecord, force: bool) -> Result<PutOutcome, StoreError> {
        let path = self.path_for(&rec.key);
        let outcome = match self.get(&rec.key) {
            Ok(old) if old.key == rec.key && old.payload == rec.payload => return Ok(PutOutcome::Unchanged),
            Ok(_) if !force => return Err(StoreError::Conflict(path.display().to_string())),
            Ok(_) => PutOutcome::Replaced,
            Err(StoreError::NotFound(_)) => PutOutcome::Created,
            Err(StoreError::Record { .. }) if force => PutOutcome::Replaced,
            Err(e) => return Err(e),
        };
        let dir = path.parent().expect("record path has a parent");
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
        tmp.write_all(canonical_json(rec).as_bytes()).map_err(io_err(&path))?;
        tmp.persist(&path).map_err(|e| io_err(&path)(e.error))?;
        Ok(outcome)
    }

    /// Stored record paths relative to the root, sorted.
    pub fn list(&self) -> Result<Vec<String>, StoreError> {
        let mut out = Vec::new();
        if self.root.exists() {
            walk(&self.root, &self.root, &mut out)?;
        }
        out.sort();
        Ok(out)
    }
}

fn walk(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<(), StoreError> {
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        let path = entry.path();
        if path.is_dir() {
            walk(root, &path, out)?;
        } else if path.extension().is_some_and(|e| e == "json") {
            let rel = path.strip_prefix(root).unwrap_or(&path);
            out.push(rel.to_string_lossy().replace('\\', "/"));
        }
    }
    Ok(())
}
