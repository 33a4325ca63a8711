use std::collections::HashMap;

use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::HeadlineRecord;
use crate::error::{Error, Result};

pub type TokenId = u32;

pub const BOS: TokenId = 0;
pub const EOS: TokenId = 1;
pub const UNK: TokenId = 2;
pub const PERIOD: TokenId = 3;

const RESERVED: [&str; 4] = ["<s>", "</s>", "<unk>", "."];

/// Word vocabulary shared by the base LM and both guides. Ids are dense from
/// zero; the four reserved tokens always occupy ids 0..4.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Vocab {
    tokens: Vec<String>,
    min_count: usize,
    #[serde(skip)]
    index: HashMap<String, TokenId>,
}

impl<'de> Deserialize<'de> for Vocab {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            tokens: Vec<String>,
            min_count: usize,
        }
        let raw = Raw::deserialize(d)?;
        Vocab::from_tokens(raw.tokens, raw.min_count).map_err(serde::de::Error::custom)
    }
}

impl Vocab {
    pub fn from_tokens(tokens: Vec<String>, min_count: usize) -> Result<Self> {
        if tokens.len() < RESERVED.len() || tokens[..4] != RESERVED {
            return Err(Error::invalid("vocabulary must start with the reserved tokens"));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i as TokenId).is_some() {
                return Err(Error::invalid(format!("duplicate vocabulary entry {t:?}")));
            }
        }
        Ok(Vocab { tokens, min_count, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    pub fn get(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    /// Maps a token to its id, folding unknowns to [`UNK`].
    pub fn id(&self, token: &str) -> TokenId {
        self.get(token).unwrap_or(UNK)
    }

    pub fn ids<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<TokenId> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    pub fn token(&self, id: TokenId) -> &str {
        &self.tokens[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Content hash identifying this vocabulary in model artifacts.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.tokens {
            h.update(t.as_bytes());
            h.update([0u8]);
        }
        let digest = h.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Builds a vocabulary from record tokens. Tokens seen at least `min_count`
/// times get ids ordered by descending frequency, ties lexicographic.
pub fn build_vocab<'a, I>(records: I, min_count: usize) -> Result<Vocab>
where
    I: IntoIterator<Item = &'a HeadlineRecord>,
{
    let mut freq: HashMap<&str, usize> = HashMap::new();
    let mut any = false;
    for r in records {
        any = true;
        for t in &r.tokens {
            *freq.entry(t.as_str()).or_default() += 1;
        }
    }
    if !any || freq.is_empty() {
        return Err(Error::EmptyInput("cannot build a vocabulary from an empty corpus"));
    }
    let mut kept: Vec<(&str, usize)> = freq
        .into_iter()
        .filter(|(t, c)| *c >= min_count.max(1) && !RESERVED.contains(t))
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let tokens = RESERVED
        .iter()
        .map(|s| s.to_string())
        .chain(kept.into_iter().map(|(t, _)| t.to_string()))
        .collect();
    Vocab::from_tokens(tokens, min_count)
}
