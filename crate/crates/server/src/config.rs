//! Service configuration: one TOML file, then `CLICKWISE_*` environment
//! variables, then command-line flags, each layer overriding the last.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    #[default]
    Ngram,
    Remote,
}

impl std::str::FromStr for ProviderKind {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "ngram" => Ok(ProviderKind::Ngram),
            "remote" => Ok(ProviderKind::Remote),
            other => bail!("unknown provider {other:?} (expected ngram or remote)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: String,
    /// Directory holding `lm.json`, `clickbait.json` and `engagement.json`.
    pub artifacts: PathBuf,
    pub provider: ProviderKind,
    pub remote_url: Option<String>,
    pub remote_timeout_secs: u64,
    pub default_k: usize,
    pub default_max_len: usize,
    /// Origins allowed to call the API from a browser.
    pub cors_origins: Vec<String>,
    /// Optional labeled dataset so sweeps can name headlines by record id.
    pub dataset: Option<PathBuf>,
    /// Upper bound on headlines per sweep request.
    pub max_sweep_headlines: usize,
    pub max_candidates: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: "127.0.0.1:8080".into(),
            artifacts: PathBuf::from("artifacts"),
            provider: ProviderKind::Ngram,
            remote_url: None,
            remote_timeout_secs: 10,
            default_k: 50,
            default_max_len: 32,
            cors_origins: Vec::new(),
            dataset: None,
            max_sweep_headlines: 5000,
            max_candidates: 16,
        }
    }
}

/// Flag values that beat both file and environment when present.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub bind: Option<String>,
    pub artifacts: Option<PathBuf>,
    pub provider: Option<ProviderKind>,
    pub remote_url: Option<String>,
    pub cors_origins: Option<Vec<String>>,
    pub dataset: Option<PathBuf>,
}

impl ServiceConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Applies overrides from `lookup`, normally `std::env::var`.
    pub fn apply_env<F>(&mut self, lookup: F) -> anyhow::Result<()>
    where
        F: Fn(&str) -> Option<String>,
    {
        fn num<T: std::str::FromStr>(key: &str, v: String) -> anyhow::Result<T> {
            v.parse().ok().with_context(|| format!("{key}={v:?} is not a valid number"))
        }
        if let Some(v) = lookup("CLICKWISE_BIND") {
            self.bind = v;
        }
        if let Some(v) = lookup("CLICKWISE_ARTIFACTS") {
            self.artifacts = v.into();
        }
        if let Some(v) = lookup("CLICKWISE_PROVIDER") {
            self.provider = v.parse()?;
        }
        if let Some(v) = lookup("CLICKWISE_REMOTE_URL") {
            self.remote_url = Some(v);
        }
        if let Some(v) = lookup("CLICKWISE_DEFAULT_K") {
            self.default_k = num("CLICKWISE_DEFAULT_K", v)?;
        }
        if let Some(v) = lookup("CLICKWISE_DEFAULT_MAX_LEN") {
            self.default_max_len = num("CLICKWISE_DEFAULT_MAX_LEN", v)?;
        }
        if let Some(v) = lookup("CLICKWISE_CORS_ORIGINS") {
            self.cors_origins = split_list(&v);
        }
        if let Some(v) = lookup("CLICKWISE_DATASET") {
            self.dataset = Some(v.into());
        }
        Ok(())
    }

    pub fn apply_overrides(&mut self, o: Overrides) {
        if let Some(v) = o.bind {
            self.bind = v;
        }
        if let Some(v) = o.artifacts {
            self.artifacts = v;
        }
        if let Some(v) = o.provider {
            self.provider = v;
        }
        if let Some(v) = o.remote_url {
            self.remote_url = Some(v);
        }
        if let Some(v) = o.cors_origins {
            self.cors_origins = v;
        }
        if let Some(v) = o.dataset {
            self.dataset = Some(v);
        }
    }

    /// File (if any), then process environment, then flags.
    pub fn resolve(file: Option<&Path>, overrides: Overrides) -> anyhow::Result<Self> {
        let mut cfg = match file {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        cfg.apply_env(|k| std::env::var(k).ok())?;
        cfg.apply_overrides(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.provider == ProviderKind::Remote && self.remote_url.is_none() {
            bail!("provider \"remote\" needs remote_url");
        }
        if self.default_k == 0 || self.default_max_len == 0 {
            bail!("default_k and default_max_len must be positive");
        }
        if self.max_candidates == 0 || self.max_sweep_headlines == 0 {
            bail!("max_candidates and max_sweep_headlines must be positive");
        }
        Ok(())
    }
}

pub fn split_list(v: &str) -> Vec<String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}
