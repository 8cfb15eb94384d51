//! Grounding, plan application and validation, forward search and the
//! reachable transition system.
//!
//! ```
//! use pdag_core::pddl::{parse_domain, parse_problem};
//! use pdag_core::plan::{ground, solve, validate_plan, GroundOptions, SearchLimits, Strategy};
//!
//! let d = parse_domain("(define (domain lamp) (:requirements :strips)
//!     (:predicates (on) (off))
//!     (:action flip :parameters () :precondition (off) :effect (and (on) (not (off)))))").unwrap();
//! let p = parse_problem("(define (problem p) (:domain lamp) (:init (off)) (:goal (on)))", &d).unwrap();
//! let task = ground(&d, &p, &GroundOptions::default()).unwrap();
//! let plan = solve(&task, Strategy::Bfs, &SearchLimits::default()).unwrap();
//! assert_eq!(plan.to_text(&task), "(flip)\n");
//! assert!(validate_plan(&task, &plan).is_valid());
//! ```

mod ground;
mod lts;
mod search;
mod state;
mod validate;

pub use ground::{
    applicable, apply, ground, GroundAction, GroundAtom, GroundError, GroundOptions, GroundTask,
    NotApplicable, DEFAULT_ACTION_CAP,
};
pub use lts::{reachable_lts, Lts, StateLimitExceeded, DEFAULT_STATE_CAP};
pub use search::{h_add, solve, SearchLimits, SolveError, Strategy};
pub use state::{ActionId, AtomId, State};
pub use validate::{validate_plan, Plan, PlanParseError, ValidationReport};
