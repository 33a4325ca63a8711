use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::vocab::{TokenId, Vocab, UNK};
use super::{CandidateProvider, CandidateSet};
use crate::corpus::tokenize;
use crate::error::{Error, Result};
use crate::http::{self, RetryPolicy};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemoteLmConfig {
    pub url: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
}

fn default_timeout() -> u64 {
    10
}

fn default_retries() -> u32 {
    2
}

#[derive(Serialize)]
struct Request<'a> {
    prefix: Vec<&'a str>,
    k: usize,
}

#[derive(Deserialize)]
struct Response {
    candidates: Vec<RemoteCandidate>,
}

#[derive(Deserialize)]
struct RemoteCandidate {
    token: String,
    logprob: f64,
}

/// Candidate provider backed by an HTTP service. Request
/// `{"prefix": [tokens], "k": n}`, response
/// `{"candidates": [{"token", "logprob"}]}`. Returned tokens are mapped onto
/// the local vocabulary (unknowns to `<unk>`, duplicates merged) and the
/// log-probabilities renormalized over the returned set.
pub struct RemoteLm {
    vocab: Arc<Vocab>,
    url: String,
    retry: RetryPolicy,
    client: reqwest::blocking::Client,
}

impl RemoteLm {
    pub fn new(config: RemoteLmConfig, vocab: Arc<Vocab>) -> Result<Self> {
        Ok(RemoteLm {
            vocab,
            client: http::client(Duration::from_secs(config.timeout_secs))?,
            retry: RetryPolicy {
                max_retries: config.max_retries,
                ..RetryPolicy::default()
            },
            url: config.url,
        })
    }

    pub fn with_retry_policy(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    fn local_id(&self, token: &str) -> TokenId {
        match tokenize(token).as_deref() {
            Ok([single]) => self.vocab.id(single),
            _ => UNK,
        }
    }
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

impl CandidateProvider for RemoteLm {
    fn candidates(&self, prefix: &[TokenId], k: usize) -> Result<CandidateSet> {
        if k == 0 {
            return Err(Error::invalid("candidate width k must be at least 1"));
        }
        let body = Request {
            prefix: prefix.iter().map(|&id| self.vocab.token(id)).collect(),
            k,
        };
        let resp: Response = http::post_json(&self.client, &self.url, &body, &self.retry)?;
        let mut merged: BTreeMap<TokenId, f64> = BTreeMap::new();
        for c in resp.candidates {
            if !c.logprob.is_finite() {
                continue;
            }
            let id = self.local_id(&c.token);
            merged
                .entry(id)
                .and_modify(|lp| *lp = log_sum_exp(*lp, c.logprob))
                .or_insert(c.logprob);
        }
        if merged.is_empty() {
            return Err(Error::Transport("remote model returned no candidates".into()));
        }
        let norm = merged.values().copied().reduce(log_sum_exp).expect("non-empty");
        Ok(CandidateSet::top_k(merged.into_iter().map(|(id, lp)| (id, lp - norm)), k))
    }
}
