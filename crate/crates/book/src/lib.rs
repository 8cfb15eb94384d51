//! Runs the guide's code blocks as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/pddl.md")]
pub mod pddl {}
#[doc = include_str!("../../../book/src/planning.md")]
pub mod planning {}
#[doc = include_str!("../../../book/src/mapping.md")]
pub mod mapping {}
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
#[doc = include_str!("../../../book/src/prompts.md")]
pub mod prompts {}
#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}
#[doc = include_str!("../../../book/src/pipeline.md")]
pub mod pipeline {}
