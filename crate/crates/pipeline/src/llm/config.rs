use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";
pub const DEFAULT_API_KEY_ENV: &str = "PDAG_API_KEY";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Transport {
    Live,
    /// Live calls whose request/response pairs are written to `fixtures`.
    Record { fixtures: PathBuf },
    /// No network; answers come from `fixtures`.
    Replay { fixtures: PathBuf },
}

impl Transport {
    pub fn tag(&self) -> &'static str {
        match self {
            Transport::Live => "live",
            Transport::Record { .. } => "record",
            Transport::Replay { .. } => "replay",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub timeout_secs: f64,
    pub retries: u32,
    /// First retry delay; doubles on every further attempt.
    pub backoff_ms: u64,
    pub max_in_flight: usize,
    pub requests_per_minute: u32,
    pub transport: Transport,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            endpoint: DEFAULT_ENDPOINT.into(),
            model: "gpt-4o".into(),
            temperature: 1.0,
            max_tokens: 4096,
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            timeout_secs: 120.0,
            retries: 3,
            backoff_ms: 500,
            max_in_flight: 4,
            requests_per_minute: 60,
            transport: Transport::Live,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("temperature {0} is outside [0, 2]")]
    Temperature(String),
    #[error("environment variable `{0}` holding the API key is not set")]
    MissingApiKey(String),
    #[error("replay transport needs a fixture directory")]
    MissingFixturePath,
    #[error("endpoint `{0}` is not a valid URL")]
    Endpoint(String),
    #[error("{0} must be positive")]
    NotPositive(&'static str),
}

impl LlmConfig {
    pub fn replay(fixtures: impl Into<PathBuf>) -> Self {
        LlmConfig { transport: Transport::Replay { fixtures: fixtures.into() }, ..LlmConfig::default() }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs)
    }

    /// Checks the invariants and, for transports that reach the network,
    /// returns the API key.
    pub fn validate(&self) -> Result<Option<String>, ConfigError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(ConfigError::Temperature(self.temperature.to_string()));
        }
        if self.timeout_secs.is_nan() || self.timeout_secs <= 0.0 {
            return Err(ConfigError::NotPositive("timeout"));
        }
        if self.max_in_flight == 0 {
            return Err(ConfigError::NotPositive("max_in_flight"));
        }
        if self.requests_per_minute == 0 {
            return Err(ConfigError::NotPositive("requests_per_minute"));
        }
        match &self.transport {
            Transport::Replay { fixtures } => {
                if fixtures.as_os_str().is_empty() {
                    return Err(ConfigError::MissingFixturePath);
                }
                Ok(None)
            }
            Transport::Record { fixtures } if fixtures.as_os_str().is_empty() => Err(ConfigError::MissingFixturePath),
            Transport::Live | Transport::Record { .. } => {
                reqwest::Url::parse(&self.endpoint).map_err(|_| ConfigError::Endpoint(self.endpoint.clone()))?;
                match std::env::var(&self.api_key_env) {
                    Ok(k) if !k.trim().is_empty() => Ok(Some(k)),
                    _ => Err(ConfigError::MissingApiKey(self.api_key_env.clone())),
                }
            }
        }
    }
}
