//! Talking to a chat-completions model, and reading its reply.

mod config;
mod extract;
pub mod fixture;
mod gateway;

pub use config::{ConfigError, LlmConfig, Transport, DEFAULT_API_KEY_ENV, DEFAULT_ENDPOINT};
pub use extract::{extract_pddl, ExtractError, ExtractedArtifacts};
pub use fixture::{ChatRequest, Fixture, Usage};
pub use gateway::{complete, Gateway, LlmError, LlmResponse};
