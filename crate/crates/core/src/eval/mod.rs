//! Rubric scoring.
//!
//! A rubric lists what an abstraction of one benchmark should change and what
//! it should keep. [`check_rubric`] turns each item into a [`Verdict`];
//! [`score`] reduces verdicts to the two per-run ratios:
//!
//! * CN, the fraction of change items that pass;
//! * AUC, the fraction of retain items that pass.
//!
//! Items the checker cannot decide come back as `NeedsHuman` and count as
//! failures until a reviewer resolves them.
//!
//! ```
//! use pdag_core::eval::*;
//! use pdag_core::parse_domain;
//! use pdag_core::parse_problem;
//!
//! let ll = parse_domain("(define (domain l) (:requirements :strips :typing)
//!     (:types car bike - object)
//!     (:predicates (parked ?c - car) (locked ?b - bike)))").unwrap();
//! let llp = parse_problem("(define (problem l) (:domain l)
//!     (:objects c1 - car b1 - bike) (:init (parked c1)) (:goal (parked c1)))", &ll).unwrap();
//! let hl = parse_domain("(define (domain h) (:requirements :strips :typing)
//!     (:types vehicle - object)
//!     (:predicates (parked ?v - vehicle)))").unwrap();
//! let hlp = parse_problem("(define (problem h) (:domain h)
//!     (:objects c1 b1 - vehicle) (:init (parked c1)) (:goal (parked c1)))", &hl).unwrap();
//!
//! let rubric = Rubric::from_json(r#"{
//!   "schema_version": 1,
//!   "benchmark": "vehicles",
//!   "items": [
//!     {"id": "vehicle", "side": "change", "kind": "merge-types", "sources": ["car", "bike"], "expected": 1},
//!     {"id": "goal", "side": "retain", "kind": "goal-consistent"}
//!   ]
//! }"#).unwrap();
//! let verdicts = check_rubric(&hl, &hlp, &ll, &llp, &rubric);
//! let s = score(&verdicts, true, true, false);
//! assert_eq!((s.cn, s.auc), (1.0, 1.0));
//! ```

mod check;
mod rubric;
mod score;

pub use check::{check_rubric, describe, fail_all, Outcome, ResolveError, ResolvedBy, Verdict};
pub use rubric::{ItemKind, ItemSide, Rubric, RubricError, RubricItem, SCHEMA_VERSION};
pub use score::{
    aggregate, render_csv, render_report, render_table, score, Aggregate, Report, RunScore, SyntaxFlags, COLUMNS,
};
