//! End-to-end driver for abstraction generation experiments.
//!
//! * [`manifest`] loads the benchmark corpus.
//! * [`llm`] sends prompt bundles to a model, or replays recorded answers,
//!   and pulls PDDL out of the replies.
//! * [`runner`] runs benchmarks, verifies reference abstractions and builds
//!   reports.
//! * [`store`] and [`record`] persist one JSON document per run.
//! * [`review`] is the HTTP API reviewers use to override verdicts.

pub mod llm;
pub mod manifest;
pub mod record;
pub mod review;
pub mod runner;
pub mod store;

pub use manifest::{load_manifest, Benchmark, BenchmarkEntry, Corpus, Manifest};
pub use record::RunRecord;
pub use runner::{evaluate, report, run_benchmark, verify, VerifyOutcome};
pub use store::Store;
