//! Loaded models. Each request works on one immutable [`ServiceState`]
//! snapshot; a reload builds a fresh snapshot and swaps the pointer.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clickwise::corpus::read_dataset;
use clickwise::decoder::Providers;
use clickwise::guides::GUIDE_FORMAT;
use clickwise::lm::{RemoteLm, RemoteLmConfig, NGRAM_FORMAT};
use clickwise::pipeline::ModelBundle;
use serde::Serialize;

use crate::config::{ProviderKind, ServiceConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArtifactVersions {
    pub lm_format: &'static str,
    pub guide_format: &'static str,
    pub vocab_fingerprint: String,
    pub provider: ProviderKind,
}

pub struct ServiceState {
    pub bundle: ModelBundle,
    remote: Option<RemoteLm>,
    pub versions: ArtifactVersions,
    /// Record id to headline text, when a dataset is configured.
    pub headlines: HashMap<String, String>,
    pub loaded_at: u64,
}

impl ServiceState {
    pub fn new(bundle: ModelBundle, remote: Option<RemoteLm>, headlines: HashMap<String, String>) -> Self {
        let versions = ArtifactVersions {
            lm_format: NGRAM_FORMAT,
            guide_format: GUIDE_FORMAT,
            vocab_fingerprint: bundle.vocab().fingerprint(),
            provider: if remote.is_some() { ProviderKind::Remote } else { ProviderKind::Ngram },
        };
        ServiceState {
            bundle,
            remote,
            versions,
            headlines,
            loaded_at: unix_now(),
        }
    }

    /// Reads the bundle (and optional dataset) named by `config`.
    pub fn load(config: &ServiceConfig) -> anyhow::Result<Self> {
        let bundle = ModelBundle::load(&config.artifacts)
            .with_context(|| format!("loading models from {}", config.artifacts.display()))?;
        let remote = match config.provider {
            ProviderKind::Ngram => None,
            ProviderKind::Remote => {
                let url = config.remote_url.clone().context("remote provider without remote_url")?;
                let lm_config = RemoteLmConfig {
                    url,
                    timeout_secs: config.remote_timeout_secs,
                    max_retries: 2,
                };
                Some(RemoteLm::new(lm_config, Arc::new(bundle.vocab().clone()))?)
            }
        };
        let headlines = match &config.dataset {
            Some(path) => read_dataset(path)?
                .into_iter()
                .map(|r| (r.record_id, r.text))
                .collect(),
            None => HashMap::new(),
        };
        Ok(Self::new(bundle, remote, headlines))
    }

    pub fn providers(&self) -> Providers<'_> {
        match &self.remote {
            Some(r) => self.bundle.providers_with(r),
            None => self.bundle.providers(),
        }
    }
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Shared by all handlers.
pub struct AppState {
    pub config: ServiceConfig,
    pub started_at: u64,
    current: RwLock<Option<Arc<ServiceState>>>,
}

impl AppState {
    pub fn new(config: ServiceConfig, state: Option<ServiceState>) -> Self {
        AppState {
            config,
            started_at: unix_now(),
            current: RwLock::new(state.map(Arc::new)),
        }
    }

    pub fn snapshot(&self) -> Option<Arc<ServiceState>> {
        self.current.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn publish(&self, state: ServiceState) {
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = Some(Arc::new(state));
    }

    /// Loads from disk, then swaps. On failure the old snapshot stays.
    pub fn reload(&self) -> anyhow::Result<()> {
        let fresh = ServiceState::load(&self.config)?;
        self.publish(fresh);
        Ok(())
    }
}
