//! Recorded request/response pairs, one JSON file per bundle hash.
//!
//! A reply for a particular run can be pinned with `<hash>.run<k>.json`;
//! lookups try that name first and fall back to `<hash>.json`.

use std::io;
use std::path::{Path, PathBuf};

use pdag_core::prompt::ChatMessage;
use serde::{Deserialize, Serialize};

use crate::store::{write_json, WriteMode};

pub const SCHEMA_VERSION: u32 = 1;

/// The chat-completions request body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_tokens: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordedResponse {
    pub raw: String,
    #[serde(default)]
    pub usage: Usage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub schema_version: u32,
    pub bundle_hash: String,
    pub request: ChatRequest,
    pub response: RecordedResponse,
}

pub fn path(dir: &Path, hash: &str, run: Option<u32>) -> PathBuf {
    match run {
        Some(k) => dir.join(format!("{hash}.run{k}.json")),
        None => dir.join(format!("{hash}.json")),
    }
}

fn read(p: &Path) -> io::Result<Option<Fixture>> {
    match std::fs::read_to_string(p) {
        Ok(text) => serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", p.display()))),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn lookup(dir: &Path, hash: &str, run: u32) -> io::Result<Option<Fixture>> {
    match read(&path(dir, hash, Some(run)))? {
        Some(f) => Ok(Some(f)),
        None => read(&path(dir, hash, None)),
    }
}

/// Writes a fixture unless one already exists under the same name.
/// Returns whether a file was written.
pub fn save(dir: &Path, f: &Fixture, run: Option<u32>) -> io::Result<bool> {
    std::fs::create_dir_all(dir)?;
    write_json(&path(dir, &f.bundle_hash, run), f, WriteMode::CreateNew)
}
