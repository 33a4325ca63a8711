use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::http::{self, RetryPolicy};

/// Anything that turns a prompt into a completion.
pub trait TextCompleter: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String>;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LlmClientConfig {
    pub base_url: String,
    pub model: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
}

fn default_timeout() -> u64 {
    30
}

fn default_retries() -> u32 {
    3
}

impl LlmClientConfig {
    /// Reads `CLICKWISE_LLM_URL`, `CLICKWISE_LLM_MODEL`,
    /// `CLICKWISE_LLM_TIMEOUT_SECS` and `CLICKWISE_LLM_MAX_RETRIES`.
    pub fn from_env() -> Result<Self> {
        let base_url = std::env::var("CLICKWISE_LLM_URL")
            .map_err(|_| Error::invalid("CLICKWISE_LLM_URL is not set"))?;
        let model = std::env::var("CLICKWISE_LLM_MODEL").unwrap_or_else(|_| "default".into());
        let parse = |key: &str, default: u64| -> Result<u64> {
            match std::env::var(key) {
                Ok(v) => v.parse().map_err(|_| Error::invalid(format!("{key}={v:?} is not a number"))),
                Err(_) => Ok(default),
            }
        };
        Ok(LlmClientConfig {
            base_url,
            model,
            timeout_secs: parse("CLICKWISE_LLM_TIMEOUT_SECS", default_timeout())?,
            max_retries: parse("CLICKWISE_LLM_MAX_RETRIES", default_retries() as u64)? as u32,
        })
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    prompt: &'a str,
}

#[derive(Deserialize)]
struct CompletionResponse {
    text: String,
}

/// Text-completion client: POSTs `{"model", "prompt"}` and reads `{"text"}`.
pub struct HttpCompleter {
    config: LlmClientConfig,
    retry: RetryPolicy,
    client: reqwest::blocking::Client,
}

impl HttpCompleter {
    pub fn new(config: LlmClientConfig) -> Result<Self> {
        let client = http::client(Duration::from_secs(config.timeout_secs))?;
        let retry = RetryPolicy {
            max_retries: config.max_retries,
            ..RetryPolicy::default()
        };
        Ok(HttpCompleter { config, retry, client })
    }

    pub fn with_retry_policy(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }
}

impl TextCompleter for HttpCompleter {
    fn complete(&self, prompt: &str) -> Result<String> {
        let body = CompletionRequest {
            model: &self.config.model,
            prompt,
        };
        let resp: CompletionResponse = http::post_json(&self.client, &self.config.base_url, &body, &self.retry)?;
        Ok(resp.text)
    }
}
