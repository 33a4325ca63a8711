use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{DecodeConfig, DecodeMode, GuidanceSpace, Omega};
use crate::error::{Error, Result};
use crate::guides::{AttributeScorer, ClickbaitScorer};
use crate::lm::{CandidateProvider, TokenId, Vocab, PERIOD};
use crate::rubric::TACTIC_COUNT;

/// `Σ_k ω_k s_k`.
pub fn positive_guidance(scores: &[f64; TACTIC_COUNT], omega: &Omega) -> f64 {
    scores
        .iter()
        .zip(omega.values())
        .map(|(&s, w)| f64::from(w) * s)
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Combined {
    pub adjusted: Vec<f64>,
    pub probs: Vec<f64>,
}

/// Adjusted score per candidate, `base + λ_pos s_pos − λ_neg s_cb`, and the
/// softmax of the adjusted scores over the candidate set. `temperature`
/// divides the adjusted scores before the softmax; pass `None` for greedy.
pub fn combine_scores(
    base_logprob: &[f64],
    s_pos: &[f64],
    s_cb: &[f64],
    lambda_pos: f64,
    lambda_neg: f64,
    temperature: Option<f64>,
) -> Result<Combined> {
    if base_logprob.is_empty() {
        return Err(Error::EmptyInput("candidate set"));
    }
    if s_pos.len() != base_logprob.len() || s_cb.len() != base_logprob.len() {
        return Err(Error::invalid("guidance vectors must match the candidate count"));
    }
    let mut adjusted = Vec::with_capacity(base_logprob.len());
    for i in 0..base_logprob.len() {
        let a = base_logprob[i] + lambda_pos * s_pos[i] - lambda_neg * s_cb[i];
        if !a.is_finite() {
            return Err(Error::NonFinite(format!(
                "adjusted score for candidate {i}: base {}, s_pos {}, s_cb {}",
                base_logprob[i], s_pos[i], s_cb[i]
            )));
        }
        adjusted.push(a);
    }
    let t = temperature.unwrap_or(1.0);
    let max = adjusted.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = adjusted.iter().map(|a| ((a - max) / t).exp()).collect();
    let z: f64 = exps.iter().sum();
    let probs = exps.into_iter().map(|e| e / z).collect();
    Ok(Combined { adjusted, probs })
}

/// One scored continuation at one decoding step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub token_id: TokenId,
    pub token: String,
    pub base_logprob: f64,
    pub s_cb: f64,
    pub s_k: [f64; TACTIC_COUNT],
    pub s_pos: f64,
    pub adjusted: f64,
    pub renormalized_prob: f64,
}

/// Everything a decode step consults.
#[derive(Clone, Copy)]
pub struct Providers<'a> {
    pub vocab: &'a Vocab,
    pub base: &'a dyn CandidateProvider,
    pub clickbait: &'a dyn ClickbaitScorer,
    pub engagement: &'a dyn AttributeScorer,
}

fn guidance_value(p: f64, space: GuidanceSpace) -> f64 {
    match space {
        GuidanceSpace::Probability => p,
        GuidanceSpace::Log => p.max(f64::MIN_POSITIVE).ln(),
    }
}

/// Index of the greedy choice: highest adjusted score, ties to the lowest
/// token id.
pub fn greedy_index(candidates: &[ScoredCandidate]) -> usize {
    let mut best = 0;
    for (i, c) in candidates.iter().enumerate().skip(1) {
        let b = &candidates[best];
        if c.adjusted > b.adjusted || (c.adjusted == b.adjusted && c.token_id < b.token_id) {
            best = i;
        }
    }
    best
}

/// Scores the top-k base continuations of `prefix` with both guides on the
/// extended prefix and picks one. Only `.` is scored as complete.
pub fn decode_step<R: Rng + ?Sized>(
    prefix: &[TokenId],
    providers: Providers<'_>,
    config: &DecodeConfig,
    rng: &mut R,
) -> Result<(TokenId, Vec<ScoredCandidate>)> {
    let set = providers.base.candidates(prefix, config.k)?;
    if set.is_empty() {
        return Err(Error::EmptyInput("base model returned no candidates"));
    }
    let mut extended = Vec::with_capacity(prefix.len() + 1);
    extended.extend_from_slice(prefix);
    extended.push(0);
    let mut base = Vec::with_capacity(set.len());
    let mut s_cb = Vec::with_capacity(set.len());
    let mut s_k = Vec::with_capacity(set.len());
    let mut s_pos = Vec::with_capacity(set.len());
    for c in &set.items {
        *extended.last_mut().expect("non-empty") = c.token;
        let complete = c.token == PERIOD;
        let cb = providers.clickbait.clickbait_score(&extended, complete);
        let attrs = providers.engagement.attribute_scores(&extended, complete);
        let transformed = attrs.map(|p| guidance_value(p, config.guidance_space));
        base.push(c.logprob);
        s_cb.push(guidance_value(cb, config.guidance_space));
        s_pos.push(positive_guidance(&transformed, &config.omega));
        s_k.push(attrs);
    }
    let temperature = (config.mode == DecodeMode::Sample).then_some(config.temperature);
    let combined = combine_scores(&base, &s_pos, &s_cb, config.lambda_pos, config.lambda_neg, temperature)?;
    let scored: Vec<ScoredCandidate> = set
        .items
        .iter()
        .enumerate()
        .map(|(i, c)| ScoredCandidate {
            token_id: c.token,
            token: providers.vocab.token(c.token).to_string(),
            base_logprob: base[i],
            s_cb: s_cb[i],
            s_k: s_k[i],
            s_pos: s_pos[i],
            adjusted: combined.adjusted[i],
            renormalized_prob: combined.probs[i],
        })
        .collect();
    let chosen = match config.mode {
        DecodeMode::Greedy => greedy_index(&scored),
        DecodeMode::Sample => WeightedIndex::new(&combined.probs)
            .map_err(|e| Error::NonFinite(format!("candidate distribution: {e}")))?
            .sample(rng),
    };
    Ok((scored[chosen].token_id, scored))
}
