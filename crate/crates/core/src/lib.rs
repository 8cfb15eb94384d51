//! Core machinery for generating and checking abstractions of STRIPS planning
//! domains.
//!
//! The crate is organised bottom-up:
//!
//! * [`pddl`] lexes, parses, checks and prints the STRIPS + typing fragment.
//! * [`plan`] grounds a domain/problem pair, applies and validates plans,
//!   searches for plans and exposes the reachable transition system.
//! * [`verify`] decides m-bisimulation between an abstract and a concrete
//!   task under a refinement mapping.
//! * [`prompt`] assembles the chat prompt bundles sent to a language model.
//! * [`eval`] scores generated abstractions against per-benchmark rubrics.

pub mod eval;
pub mod pddl;
pub mod plan;
pub mod prompt;
pub mod verify;

pub use pddl::{parse_domain, parse_problem, print_domain, print_problem, DomainAst, ProblemAst};
