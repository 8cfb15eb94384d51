#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use pdag_core::prompt::ShotMode;
use pdag_pipeline::llm::{Gateway, LlmConfig};
use pdag_pipeline::runner::write_golden_fixture;
use pdag_pipeline::{load_manifest, Corpus, Store};
use tempfile::TempDir;

pub mod extract_suite;

pub fn manifest_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus/manifest.json")
}

pub fn corpus() -> Corpus {
    load_manifest(&manifest_path()).unwrap()
}

/// A fresh store whose fixture directory holds golden answers for the
/// given benchmarks, and a replay gateway over it.
pub fn golden(corpus: &Corpus, benches: &[(&str, ShotMode)]) -> (TempDir, Store, Arc<Gateway>) {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path()).unwrap();
    let cfg = LlmConfig::replay(store.fixtures_dir());
    for (id, shot) in benches {
        write_golden_fixture(corpus.get(id).unwrap(), *shot, &cfg, &store.fixtures_dir()).unwrap();
    }
    let gw = Arc::new(Gateway::new(cfg).unwrap());
    (dir, store, gw)
}
