use std::time::{Duration, Instant};

use pdag_core::prompt::PromptBundle;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::{Mutex, Semaphore};

use super::config::{ConfigError, LlmConfig, Transport};
use super::fixture::{self, ChatRequest, Fixture, RecordedResponse, Usage};

const MAX_BACKOFF: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmResponse {
    pub raw: String,
    pub usage: Usage,
    pub latency_ms: u64,
    pub transport_tag: String,
    pub bundle_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LlmError {
    #[error("the endpoint rejected the API key (HTTP {status})")]
    Auth { status: u16 },
    #[error("no reply within the timeout after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("still rate limited after {attempts} attempt(s)")]
    RateLimited { attempts: u32 },
    #[error("no fixture for bundle {hash} (run {run})")]
    FixtureMiss { hash: String, run: u32 },
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("transport error: {message}")]
    Network { message: String },
    #[error("malformed reply: {message}")]
    BadResponse { message: String },
    #[error("fixture store: {message}")]
    Fixture { message: String },
    #[error("configuration: {message}")]
    Config { message: String },
}

enum Failure {
    Retry(LlmError, Option<Duration>),
    Fatal(LlmError),
}

struct Bucket {
    tokens: f64,
    burst: f64,
    per_sec: f64,
    last: Instant,
}

impl Bucket {
    fn new(per_minute: u32, burst: usize) -> Self {
        let burst = burst.max(1) as f64;
        Bucket { tokens: burst, burst, per_sec: per_minute as f64 / 60.0, last: Instant::now() }
    }

    /// Takes a token, or says how long to wait for one.
    fn take(&mut self) -> Option<Duration> {
        let now = Instant::now();
        self.tokens = (self.tokens + now.duration_since(self.last).as_secs_f64() * self.per_sec).min(self.burst);
        self.last = now;
        if self.tokens >= 1.0 {
            self.tokens -= 1.0;
            None
        } else {
            Some(Duration::from_secs_f64((1.0 - self.tokens) / self.per_sec))
        }
    }
}

/// Sends prompt bundles to a chat-completions endpoint or answers them from
/// fixtures. Safe to share between tasks.
pub struct Gateway {
    cfg: LlmConfig,
    key: Option<String>,
    http: reqwest::Client,
    slots: Semaphore,
    bucket: Mutex<Bucket>,
    record: Mutex<()>,
}

#[derive(Deserialize)]
struct Completion {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    #[serde(default)]
    content: Option<String>,
}

impl Gateway {
    pub fn new(cfg: LlmConfig) -> Result<Gateway, ConfigError> {
        let key = cfg.validate()?;
        let http = reqwest::Client::builder()
            .timeout(cfg.timeout())
            .build()
            .map_err(|e| ConfigError::Endpoint(format!("{}: {e}", cfg.endpoint)))?;
        Ok(Gateway {
            slots: Semaphore::new(cfg.max_in_flight),
            bucket: Mutex::new(Bucket::new(cfg.requests_per_minute, cfg.max_in_flight)),
            record: Mutex::new(()),
            key,
            http,
            cfg,
        })
    }

    pub fn config(&self) -> &LlmConfig {
        &self.cfg
    }

    pub fn request(&self, bundle: &PromptBundle) -> ChatRequest {
        ChatRequest {
            model: self.cfg.model.clone(),
            messages: bundle.messages.clone(),
            temperature: self.cfg.temperature,
            max_tokens: self.cfg.max_tokens,
        }
    }

    /// One completion for run `run` (1-based) of a bundle.
    pub async fn complete(&self, bundle: &PromptBundle, run: u32) -> Result<LlmResponse, LlmError> {
        let hash = bundle.hash();
        let started = Instant::now();
        let (raw, usage) = match &self.cfg.transport {
            Transport::Replay { fixtures } => {
                let f = fixture::lookup(fixtures, &hash, run)
                    .map_err(|e| LlmError::Fixture { message: e.to_string() })?
                    .ok_or_else(|| LlmError::FixtureMiss { hash: hash.clone(), run })?;
                if f.response.raw.is_empty() {
                    return Err(LlmError::BadResponse { message: "fixture holds an empty reply".into() });
                }
                return Ok(LlmResponse {
                    raw: f.response.raw,
                    usage: f.response.usage,
                    latency_ms: 0,
                    transport_tag: "replay".into(),
                    bundle_hash: hash,
                });
            }
            Transport::Live => self.live(&self.request(bundle)).await?,
            Transport::Record { fixtures } => {
                let request = self.request(bundle);
                let (raw, usage) = self.live(&request).await?;
                let f = Fixture {
                    schema_version: fixture::SCHEMA_VERSION,
                    bundle_hash: hash.clone(),
                    request,
                    response: RecordedResponse { raw: raw.clone(), usage },
                };
                let _guard = self.record.lock().await;
                fixture::save(fixtures, &f, Some(run)).map_err(|e| LlmError::Fixture { message: e.to_string() })?;
                (raw, usage)
            }
        };
        Ok(LlmResponse {
            raw,
            usage,
            latency_ms: started.elapsed().as_millis() as u64,
            transport_tag: self.cfg.transport.tag().into(),
            bundle_hash: hash,
        })
    }

    async fn live(&self, req: &ChatRequest) -> Result<(String, Usage), LlmError> {
        let mut attempt = 0;
        loop {
            attempt += 1;
            match self.attempt(req, attempt).await {
                Ok(r) => return Ok(r),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retry(e, _)) if attempt > self.cfg.retries => return Err(e),
                Err(Failure::Retry(_, hint)) => {
                    let backoff = Duration::from_millis(self.cfg.backoff_ms.saturating_mul(1 << (attempt - 1).min(16)));
                    tokio::time::sleep(hint.unwrap_or(backoff).min(MAX_BACKOFF)).await;
                }
            }
        }
    }

    async fn attempt(&self, req: &ChatRequest, attempts: u32) -> Result<(String, Usage), Failure> {
        loop {
            let wait = self.bucket.lock().await.take();
            match wait {
                None => break,
                Some(d) => tokio::time::sleep(d).await,
            }
        }
        let _slot = self.slots.acquire().await.expect("semaphore is never closed");
        let mut call = self.http.post(&self.cfg.endpoint).json(req);
        if let Some(k) = &self.key {
            call = call.bearer_auth(k);
        }
        let resp = call.send().await.map_err(|e| {
            if e.is_timeout() {
                Failure::Retry(LlmError::Timeout { attempts }, None)
            } else {
                Failure::Retry(LlmError::Network { message: e.to_string() }, None)
            }
        })?;
        let status = resp.status().as_u16();
        let retry_after = resp
            .headers()
            .get(reqwest::header::RETRY_AFTER)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<f64>().ok())
            .map(Duration::from_secs_f64);
        let body = resp.text().await.map_err(|e| {
            if e.is_timeout() {
                Failure::Retry(LlmError::Timeout { attempts }, None)
            } else {
                Failure::Retry(LlmError::Network { message: e.to_string() }, None)
            }
        })?;
        match status {
            200..=299 => {}
            401 | 403 => return Err(Failure::Fatal(LlmError::Auth { status })),
            429 => return Err(Failure::Retry(LlmError::RateLimited { attempts }, retry_after)),
            500..=599 => return Err(Failure::Retry(LlmError::Http { status, body }, retry_after)),
            _ => return Err(Failure::Fatal(LlmError::Http { status, body })),
        }
        let c: Completion = serde_json::from_str(&body)
            .map_err(|e| Failure::Fatal(LlmError::BadResponse { message: e.to_string() }))?;
        let raw = c
            .choices
            .into_iter()
            .next()
            .and_then(|ch| ch.message.content)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Failure::Fatal(LlmError::BadResponse { message: "no message content".into() }))?;
        Ok((raw, c.usage.unwrap_or_default()))
    }
}

/// One-off completion for the first run of a bundle.
pub async fn complete(bundle: &PromptBundle, cfg: LlmConfig) -> Result<LlmResponse, LlmError> {
    let g = Gateway::new(cfg).map_err(|e| LlmError::Config { message: e.to_string() })?;
    g.complete(bundle, 1).await
}
