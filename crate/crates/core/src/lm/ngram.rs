//! Interpolated absolute-discounting n-gram model.
//!
//! For a history `h` seen `c(h)` times with `N1+(h)` distinct continuations:
//!
//! ```text
//! P(w | h) = max(c(h, w) - d, 0) / c(h) + d * N1+(h) / c(h) * P(w | h')
//! ```
//!
//! where `h'` drops the oldest token. Unseen histories fall through to the
//! lower order, and the unigram level interpolates with the uniform
//! distribution over the outcome set, so every outcome keeps positive mass.
//!
//! The outcome set is the vocabulary minus `<s>` and `.`; end of sentence is
//! predicted as `</s>` and surfaced to decoders as `.`.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::vocab::{TokenId, Vocab, BOS, EOS, PERIOD, UNK};
use super::{CandidateProvider, CandidateSet};
use crate::corpus::{content_tokens, HeadlineRecord};
use crate::error::{Error, Result};

pub const NGRAM_FORMAT: &str = "clickwise-ngram/1";

#[derive(Debug, Clone, Default, PartialEq)]
struct HistoryStats {
    total: u64,
    next: HashMap<TokenId, u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NgramModel {
    order: usize,
    discount: f64,
    vocab: Vocab,
    /// `tables[m]` holds histories of length `m` (order `m + 1`).
    tables: Vec<HashMap<Vec<TokenId>, HistoryStats>>,
    unigram: Vec<f64>,
}

fn is_outcome(id: TokenId) -> bool {
    id != BOS && id != PERIOD
}

/// Trains on the given records (callers pick the split). Each headline is
/// padded with `order - 1` `<s>` tokens and terminated by `</s>`.
pub fn train_ngram<'a, I>(records: I, vocab: Vocab, order: usize, discount: f64) -> Result<NgramModel>
where
    I: IntoIterator<Item = &'a HeadlineRecord>,
{
    if order < 1 {
        return Err(Error::invalid("n-gram order must be at least 1"));
    }
    if !(discount > 0.0 && discount < 1.0) {
        return Err(Error::invalid(format!("discount {discount} outside (0, 1)")));
    }
    let mut tables: Vec<HashMap<Vec<TokenId>, HistoryStats>> = vec![HashMap::new(); order];
    let mut sentences = 0usize;
    for r in records {
        let content = content_tokens(&r.tokens);
        if content.is_empty() {
            continue;
        }
        sentences += 1;
        let mut stream = vec![BOS; order - 1];
        stream.extend(content.iter().map(|t| vocab.id(t)).map(|id| if id == PERIOD { EOS } else { id }));
        stream.push(EOS);
        for pos in order - 1..stream.len() {
            let w = stream[pos];
            for m in 0..order {
                let hist = stream[pos - m..pos].to_vec();
                let stats = tables[m].entry(hist).or_default();
                stats.total += 1;
                *stats.next.entry(w).or_default() += 1;
            }
        }
    }
    if sentences == 0 {
        return Err(Error::EmptyInput("no training headlines for the n-gram model"));
    }
    Ok(NgramModel::from_parts(order, discount, vocab, tables))
}

impl NgramModel {
    fn from_parts(order: usize, discount: f64, vocab: Vocab, tables: Vec<HashMap<Vec<TokenId>, HistoryStats>>) -> Self {
        let outcomes = (0..vocab.len() as TokenId).filter(|&i| is_outcome(i)).count() as f64;
        let root = &tables[0][&Vec::new()];
        let n = root.total as f64;
        let backoff = discount * root.next.len() as f64 / n;
        let unigram = (0..vocab.len() as TokenId)
            .map(|id| {
                if !is_outcome(id) {
                    return 0.0;
                }
                let c = root.next.get(&id).copied().unwrap_or(0) as f64;
                (c - discount).max(0.0) / n + backoff / outcomes
            })
            .collect();
        NgramModel {
            order,
            discount,
            vocab,
            tables,
            unigram,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    /// The `order - 1` most recent tokens, left-padded with `<s>`.
    fn history(&self, prefix: &[TokenId]) -> Vec<TokenId> {
        let need = self.order - 1;
        let mut h = vec![BOS; need.saturating_sub(prefix.len())];
        h.extend_from_slice(&prefix[prefix.len().saturating_sub(need)..]);
        h
    }

    /// Next-token distribution over every vocabulary id (zero at `<s>` and `.`).
    pub fn distribution(&self, prefix: &[TokenId]) -> Vec<f64> {
        let history = self.history(prefix);
        let mut p = self.unigram.clone();
        for m in 1..self.order {
            let Some(stats) = self.tables[m].get(&history[history.len() - m..]) else {
                continue;
            };
            let total = stats.total as f64;
            let gamma = self.discount * stats.next.len() as f64 / total;
            for x in p.iter_mut() {
                *x *= gamma;
            }
            for (&w, &c) in &stats.next {
                p[w as usize] += (c as f64 - self.discount).max(0.0) / total;
            }
        }
        p
    }

    /// `P(token | prefix)`; `.` is read as end of sentence.
    pub fn prob(&self, prefix: &[TokenId], token: TokenId) -> f64 {
        let token = if token == PERIOD { EOS } else { token };
        self.distribution(prefix)[token as usize]
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(std::io::BufWriter::new(file), &self.to_artifact())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let artifact: NgramArtifact = serde_json::from_reader(std::io::BufReader::new(file))?;
        Self::from_artifact(artifact)
    }

    fn to_artifact(&self) -> NgramArtifact {
        let tables = self
            .tables
            .iter()
            .map(|t| {
                let mut rows: Vec<TableRow> = t
                    .iter()
                    .map(|(h, s)| {
                        let mut next: Vec<(TokenId, u64)> = s.next.iter().map(|(&w, &c)| (w, c)).collect();
                        next.sort_unstable();
                        TableRow { history: h.clone(), next }
                    })
                    .collect();
                rows.sort_by(|a, b| a.history.cmp(&b.history));
                rows
            })
            .collect();
        NgramArtifact {
            format: NGRAM_FORMAT.to_string(),
            order: self.order,
            discount: self.discount,
            vocab: self.vocab.clone(),
            tables,
        }
    }

    fn from_artifact(a: NgramArtifact) -> Result<Self> {
        if a.format != NGRAM_FORMAT {
            return Err(Error::VersionMismatch {
                expected: NGRAM_FORMAT.into(),
                found: a.format,
            });
        }
        if a.tables.len() != a.order || a.order == 0 {
            return Err(Error::invalid("n-gram artifact has inconsistent order"));
        }
        let tables = a
            .tables
            .into_iter()
            .map(|rows| {
                rows.into_iter()
                    .map(|row| {
                        let total = row.next.iter().map(|(_, c)| c).sum();
                        (row.history, HistoryStats { total, next: row.next.into_iter().collect() })
                    })
                    .collect()
            })
            .collect::<Vec<HashMap<_, _>>>();
        if !tables[0].contains_key(&Vec::new()) {
            return Err(Error::invalid("n-gram artifact has no unigram table"));
        }
        Ok(Self::from_parts(a.order, a.discount, a.vocab, tables))
    }
}

#[derive(Serialize, Deserialize)]
struct TableRow {
    history: Vec<TokenId>,
    next: Vec<(TokenId, u64)>,
}

#[derive(Serialize, Deserialize)]
struct NgramArtifact {
    format: String,
    order: usize,
    discount: f64,
    vocab: Vocab,
    tables: Vec<Vec<TableRow>>,
}

/// Proposes the `k` most likely continuations. `<unk>` keeps its share of
/// probability mass but is never proposed, so generated text only contains
/// vocabulary words.
impl CandidateProvider for NgramModel {
    fn candidates(&self, prefix: &[TokenId], k: usize) -> Result<CandidateSet> {
        if k == 0 {
            return Err(Error::invalid("candidate width k must be at least 1"));
        }
        let dist = self.distribution(prefix);
        let scored = dist
            .iter()
            .enumerate()
            .filter(|(id, _)| is_outcome(*id as TokenId) && *id as TokenId != UNK)
            .map(|(id, &p)| {
                let id = id as TokenId;
                (if id == EOS { PERIOD } else { id }, p.ln())
            });
        Ok(CandidateSet::top_k(scored, k))
    }
}
