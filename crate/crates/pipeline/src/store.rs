//! The run datastore: a directory of JSON documents.
//!
//! ```text
//! <root>/runs/<benchmark>/<run_id>.json
//! <root>/reports/
//! <root>/fixtures/
//! ```
//!
//! Every file is written to a temporary sibling first and renamed into
//! place, so a reader sees either a whole document or none.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::record::{RunRecord, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WriteMode {
    /// Fail quietly (return `false`) if the target exists.
    CreateNew,
    Overwrite,
}

/// Atomically writes pretty JSON. Returns whether the file was written.
pub fn write_json<T: Serialize>(path: &Path, value: &T, mode: WriteMode) -> io::Result<bool> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    write_text(path, &text, mode)
}

pub fn write_text(path: &Path, text: &str, mode: WriteMode) -> io::Result<bool> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    match mode {
        WriteMode::Overwrite => tmp.persist(path).map(|_| true).map_err(|e| e.error),
        WriteMode::CreateNew => match tmp.persist_noclobber(path) {
            Ok(_) => Ok(true),
            Err(e) if e.error.kind() == io::ErrorKind::AlreadyExists => Ok(false),
            Err(e) => Err(e.error),
        },
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("run {0} already exists; pass --force to overwrite it")]
    Exists(String),
    #[error("no run with id {0}")]
    NotFound(String),
    #[error("{path}: {message}")]
    Corrupt { path: PathBuf, message: String },
}

fn io_at(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    /// Opens a store, creating its directories if needed.
    pub fn open(root: impl Into<PathBuf>) -> Result<Store, StoreError> {
        let s = Store { root: root.into() };
        for d in [s.runs_dir(), s.reports_dir(), s.fixtures_dir()] {
            std::fs::create_dir_all(&d).map_err(io_at(&d))?;
        }
        Ok(s)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn runs_dir(&self) -> PathBuf {
        self.root.join("runs")
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.root.join("reports")
    }

    pub fn fixtures_dir(&self) -> PathBuf {
        self.root.join("fixtures")
    }

    pub fn run_path(&self, benchmark: &str, run_id: &str) -> PathBuf {
        self.runs_dir().join(benchmark).join(format!("{run_id}.json"))
    }

    pub fn contains(&self, benchmark: &str, run_id: &str) -> bool {
        self.run_path(benchmark, run_id).exists()
    }

    /// Persists a new record. An existing record with the same id is kept
    /// unless `force` is set.
    pub fn save_run(&self, r: &RunRecord, force: bool) -> Result<(), StoreError> {
        let path = self.run_path(&r.benchmark, &r.run_id);
        let mode = if force { WriteMode::Overwrite } else { WriteMode::CreateNew };
        match write_json(&path, r, mode).map_err(io_at(&path))? {
            true => Ok(()),
            false => Err(StoreError::Exists(r.run_id.clone())),
        }
    }

    /// Rewrites a record after a review action.
    pub fn update_run(&self, r: &RunRecord) -> Result<(), StoreError> {
        let path = self.run_path(&r.benchmark, &r.run_id);
        if !path.exists() {
            return Err(StoreError::NotFound(r.run_id.clone()));
        }
        write_json(&path, r, WriteMode::Overwrite).map_err(io_at(&path))?;
        Ok(())
    }

    fn read(path: &Path) -> Result<RunRecord, StoreError> {
        let text = std::fs::read_to_string(path).map_err(io_at(path))?;
        let v: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| StoreError::Corrupt { path: path.into(), message: e.to_string() })?;
        match v.get("schema_version").and_then(|x| x.as_u64()) {
            Some(n) if n == SCHEMA_VERSION as u64 => {}
            other => {
                return Err(StoreError::Corrupt {
                    path: path.into(),
                    message: format!("unsupported schema_version {other:?}"),
                })
            }
        }
        serde_json::from_value(v).map_err(|e| StoreError::Corrupt { path: path.into(), message: e.to_string() })
    }

    pub fn load_run(&self, run_id: &str) -> Result<RunRecord, StoreError> {
        let valid = !run_id.is_empty() && run_id.chars().all(|c| c.is_ascii_alphanumeric());
        if valid {
            for dir in self.benchmark_dirs()? {
                let p = dir.join(format!("{run_id}.json"));
                if p.exists() {
                    return Self::read(&p);
                }
            }
        }
        Err(StoreError::NotFound(run_id.to_string()))
    }

    fn benchmark_dirs(&self) -> Result<Vec<PathBuf>, StoreError> {
        let runs = self.runs_dir();
        let mut out = vec![];
        for e in std::fs::read_dir(&runs).map_err(io_at(&runs))? {
            let e = e.map_err(io_at(&runs))?;
            if e.path().is_dir() {
                out.push(e.path());
            }
        }
        out.sort();
        Ok(out)
    }

    /// Every record, ordered by benchmark, shot and run index.
    pub fn list_runs(&self) -> Result<Vec<RunRecord>, StoreError> {
        let mut out = vec![];
        for dir in self.benchmark_dirs()? {
            for e in std::fs::read_dir(&dir).map_err(io_at(&dir))? {
                let p = e.map_err(io_at(&dir))?.path();
                if p.extension().is_some_and(|x| x == "json") {
                    out.push(Self::read(&p)?);
                }
            }
        }
        out.sort_by(|a, b| (&a.benchmark, a.shot, a.run_index).cmp(&(&b.benchmark, b.shot, b.run_index)));
        Ok(out)
    }

    pub fn write_report(&self, name: &str, ext: &str, text: &str) -> Result<PathBuf, StoreError> {
        let path = self.reports_dir().join(format!("{name}.{ext}"));
        write_text(&path, text, WriteMode::Overwrite).map_err(io_at(&path))?;
        Ok(path)
    }
}
