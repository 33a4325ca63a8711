//! Base language models proposing next-token candidates.

mod ngram;
mod remote;
mod vocab;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use ngram::{train_ngram, NgramModel, NGRAM_FORMAT};
pub use remote::{RemoteLm, RemoteLmConfig};
pub use vocab::{build_vocab, TokenId, Vocab, BOS, EOS, PERIOD, UNK};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub token: TokenId,
    pub logprob: f64,
}

/// At most `k` distinct tokens, sorted by descending log-probability with
/// ties broken by ascending token id.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CandidateSet {
    pub items: Vec<Candidate>,
}

impl CandidateSet {
    pub fn top_k<I: IntoIterator<Item = (TokenId, f64)>>(scored: I, k: usize) -> Self {
        let mut items: Vec<Candidate> = scored
            .into_iter()
            .map(|(token, logprob)| Candidate { token, logprob })
            .collect();
        items.sort_by(|a, b| b.logprob.total_cmp(&a.logprob).then(a.token.cmp(&b.token)));
        items.truncate(k);
        CandidateSet { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Source of next-token candidates for a token-id prefix. `.` (the
/// [`PERIOD`] id) stands for end of headline.
pub trait CandidateProvider: Send + Sync {
    fn candidates(&self, prefix: &[TokenId], k: usize) -> Result<CandidateSet>;
}

impl<T: CandidateProvider + ?Sized> CandidateProvider for &T {
    fn candidates(&self, prefix: &[TokenId], k: usize) -> Result<CandidateSet> {
        (**self).candidates(prefix, k)
    }
}

impl<T: CandidateProvider + ?Sized> CandidateProvider for std::sync::Arc<T> {
    fn candidates(&self, prefix: &[TokenId], k: usize) -> Result<CandidateSet> {
        (**self).candidates(prefix, k)
    }
}
