//! Sparse prefix features: unigram and adjacent-bigram counts, a prefix
//! length bucket, the completion flag and a bias.

use std::collections::HashMap;

use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lm::{TokenId, Vocab, PERIOD};

pub const BIAS: u32 = 0;
pub const COMPLETE_FLAG: u32 = 1;
const BUCKET_BASE: u32 = 2;
pub const LENGTH_BUCKETS: usize = 6;
const UNIGRAM_BASE: u32 = BUCKET_BASE + LENGTH_BUCKETS as u32;

/// Bucket index for a prefix of `t` content tokens: 1, 2, 3, 4-6, 7-10, 11+.
pub fn length_bucket(t: usize) -> usize {
    match t {
        0 | 1 => 0,
        2 => 1,
        3 => 2,
        4..=6 => 3,
        7..=10 => 4,
        _ => 5,
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector {
    /// `(feature id, value)` sorted by id.
    pub entries: Vec<(u32, f64)>,
}

impl FeatureVector {
    pub fn get(&self, id: u32) -> f64 {
        self.entries
            .binary_search_by_key(&id, |e| e.0)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn dot(&self, weights: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| weights[i as usize] * v).sum()
    }
}

/// Feature layout bound to one vocabulary. Bigram slots are allocated for
/// the pairs seen while building the space; unseen pairs contribute nothing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureSpace {
    vocab_fingerprint: String,
    vocab_len: usize,
    bigrams: Vec<(TokenId, TokenId)>,
    #[serde(skip)]
    bigram_index: HashMap<(TokenId, TokenId), u32>,
}

impl<'de> Deserialize<'de> for FeatureSpace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            vocab_fingerprint: String,
            vocab_len: usize,
            bigrams: Vec<(TokenId, TokenId)>,
        }
        let raw = Raw::deserialize(d)?;
        Ok(FeatureSpace::from_parts(raw.vocab_fingerprint, raw.vocab_len, raw.bigrams))
    }
}

impl FeatureSpace {
    fn from_parts(vocab_fingerprint: String, vocab_len: usize, bigrams: Vec<(TokenId, TokenId)>) -> Self {
        let base = UNIGRAM_BASE + vocab_len as u32;
        let bigram_index = bigrams
            .iter()
            .enumerate()
            .map(|(i, &pair)| (pair, base + i as u32))
            .collect();
        FeatureSpace {
            vocab_fingerprint,
            vocab_len,
            bigrams,
            bigram_index,
        }
    }

    /// Collects the bigram inventory from token-id sequences.
    pub fn build<'a, I>(vocab: &Vocab, sequences: I) -> Self
    where
        I: IntoIterator<Item = &'a [TokenId]>,
    {
        let mut pairs: Vec<(TokenId, TokenId)> = sequences
            .into_iter()
            .flat_map(|s| s.windows(2).map(|w| (w[0], w[1])))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        Self::from_parts(vocab.fingerprint(), vocab.len(), pairs)
    }

    pub fn dim(&self) -> usize {
        UNIGRAM_BASE as usize + self.vocab_len + self.bigrams.len()
    }

    pub fn vocab_fingerprint(&self) -> &str {
        &self.vocab_fingerprint
    }

    /// Identifies the full layout (vocabulary plus bigram inventory).
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.vocab_fingerprint.as_bytes());
        for (a, b) in &self.bigrams {
            h.update(a.to_le_bytes());
            h.update(b.to_le_bytes());
        }
        let digest = h.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn check_vocab(&self, vocab: &Vocab) -> Result<()> {
        let found = vocab.fingerprint();
        if found != self.vocab_fingerprint {
            return Err(Error::FeatureSpaceMismatch {
                expected: self.vocab_fingerprint.clone(),
                found,
            });
        }
        Ok(())
    }

    pub fn unigram(&self, token: TokenId) -> u32 {
        UNIGRAM_BASE + token
    }

    pub fn bigram(&self, a: TokenId, b: TokenId) -> Option<u32> {
        self.bigram_index.get(&(a, b)).copied()
    }

    pub fn length_feature(&self, bucket: usize) -> u32 {
        BUCKET_BASE + bucket as u32
    }

    pub fn featurize(&self, ids: &[TokenId], is_complete: bool) -> FeatureVector {
        let content_len = if is_complete && ids.last() == Some(&PERIOD) {
            ids.len() - 1
        } else {
            ids.len()
        };
        let mut entries: Vec<(u32, f64)> = Vec::with_capacity(2 * ids.len() + 3);
        entries.push((BIAS, 1.0));
        if is_complete {
            entries.push((COMPLETE_FLAG, 1.0));
        }
        entries.push((self.length_feature(length_bucket(content_len)), 1.0));
        for &t in ids {
            if (t as usize) < self.vocab_len {
                entries.push((self.unigram(t), 1.0));
            }
        }
        for w in ids.windows(2) {
            if let Some(f) = self.bigram(w[0], w[1]) {
                entries.push((f, 1.0));
            }
        }
        entries.sort_unstable_by_key(|e| e.0);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
        for (id, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == id => last.1 += v,
                _ => merged.push((id, v)),
            }
        }
        FeatureVector { entries: merged }
    }
}
