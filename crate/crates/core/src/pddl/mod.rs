//! The STRIPS + typing fragment of PDDL: lexing, parsing with error
//! recovery, semantic checks and canonical printing.
//!
//! ```
//! use pdag_core::pddl::parse_domain;
//!
//! let d = parse_domain("(define (domain d) (:requirements :strips :typing))").unwrap();
//! assert_eq!(d.name.spelling(), "d");
//! assert!(d.predicates.is_empty());
//! ```

mod ast;
mod diag;
mod ident;
mod parse;
mod print;
pub mod sexpr;

pub use ast::{
    ActionSchema, Atom, DomainAst, PredicateSchema, ProblemAst, Requirement, TypeHierarchy, Typed,
};
pub use diag::{codes, Diagnostic, Diagnostics, Severity, Span};
pub use ident::Ident;
pub use parse::{parse_domain, parse_domain_full, parse_problem, parse_problem_full, Parsed};
pub use print::{print_domain, print_problem};
