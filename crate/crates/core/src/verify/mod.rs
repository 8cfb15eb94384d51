//! Refinement mappings and m-bisimulation between ground transition systems.
//!
//! A mapping sends every abstract type to concrete types, every abstract
//! predicate to a formula over concrete atoms and every abstract action to a
//! loop-free program over concrete actions. [`check_bisimulation`] computes
//! the greatest relation between the two reachable state spaces in which
//! related states agree on every mapped fluent and every step on one side is
//! matched on the other.
//!
//! ```
//! use pdag_core::pddl::{parse_domain, parse_problem};
//! use pdag_core::plan::{ground, GroundOptions};
//! use pdag_core::verify::{check_bisimulation, parse_mapping, VerifyCaps};
//!
//! let ll = parse_domain("(define (domain ll) (:requirements :strips :typing)
//!     (:types a b)
//!     (:predicates (done-a) (done-b))
//!     (:action do-a :parameters () :precondition (and) :effect (done-a))
//!     (:action do-b :parameters () :precondition (done-a) :effect (done-b)))").unwrap();
//! let hl = parse_domain("(define (domain hl) (:requirements :strips)
//!     (:predicates (done))
//!     (:action finish :parameters () :precondition (and) :effect (done)))").unwrap();
//! let llp = parse_problem("(define (problem p) (:domain ll) (:init) (:goal (done-b)))", &ll).unwrap();
//! let hlp = parse_problem("(define (problem p) (:domain hl) (:init) (:goal (done)))", &hl).unwrap();
//!
//! let m = parse_mapping("
//! fluents:
//!   done = done-b
//! actions:
//!   finish = do-a ; do-b
//! ", &hl, &ll).unwrap();
//!
//! let opts = GroundOptions::default();
//! let (ht, lt) = (ground(&hl, &hlp, &opts).unwrap(), ground(&ll, &llp, &opts).unwrap());
//! let report = check_bisimulation(&ht, &lt, &m, &VerifyCaps::default()).unwrap();
//! assert!(report.is_bisimilar());
//! assert_eq!(report.relation_size, 3);
//! ```

mod bisim;
mod mapping;

pub use bisim::{
    check_bisimulation, instantiate, macro_steps, replay_counterexample, soundness_summary, BisimReport,
    Condition, Counterexample, GroundProgram, Instance, Verdict, VerifyCaps, VerifyError,
};
pub use mapping::{
    check, parse_mapping, ActionEntry, FluentEntry, Formula, Program, RefinementMapping, Term, TypeEntry,
};
