use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::DecodeConfig;
use super::step::{decode_step, positive_guidance, Providers, ScoredCandidate};
use crate::corpus::{content_tokens, detokenize, tokenize, PERIOD as PERIOD_STR};
use crate::error::{Error, Result};
use crate::lm::{TokenId, PERIOD};
use crate::rubric::TACTIC_COUNT;

/// Function words ignored by the fidelity overlap.
pub const STOPWORDS: [&str; 50] = [
    "a", "about", "after", "all", "an", "and", "are", "as", "at", "be", "been", "but", "by", "for", "from", "has",
    "have", "he", "her", "his", "how", "i", "if", "in", "into", "is", "it", "its", "new", "not", "of", "on", "or",
    "out", "over", "says", "she", "so", "than", "that", "the", "their", "they", "this", "to", "up", "was", "we",
    "what", "with",
];

fn content_words(tokens: &[String]) -> BTreeSet<&str> {
    tokens
        .iter()
        .map(String::as_str)
        .filter(|t| t.chars().any(char::is_alphanumeric) && !STOPWORDS.contains(t))
        .collect()
}

/// Jaccard overlap of the stopword-free content words of two token lists.
/// Two lists without content words count as identical.
pub fn fidelity(source: &[String], output: &[String]) -> f64 {
    let a = content_words(source);
    let b = content_words(output);
    let union = a.union(&b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    pub step: usize,
    pub chosen: TokenId,
    pub candidates: Vec<ScoredCandidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewriteResult {
    pub source: String,
    /// Conditioning tokens followed by generated tokens.
    pub tokens: Vec<String>,
    pub text: String,
    pub prompt_len: usize,
    /// Whether generation ended on `.` rather than at `max_len`.
    pub completed: bool,
    pub trace: Vec<StepTrace>,
    /// Guide scores of the finished headline, marked complete.
    pub clickbait_score: f64,
    pub attribute_scores: [f64; TACTIC_COUNT],
    /// `Σ ω_k s_k` of the finished headline.
    pub s_pos: f64,
    pub fidelity: f64,
    /// Sum of base log-probabilities of the generated tokens.
    pub logprob: f64,
    pub config: DecodeConfig,
}

impl RewriteResult {
    pub fn generated(&self) -> &[String] {
        &self.tokens[self.prompt_len..]
    }

    /// Mean attribute score over the tactics with `ω = +1`.
    pub fn target_score(&self) -> Option<f64> {
        let targets: Vec<usize> = self.config.omega.targets().collect();
        if targets.is_empty() {
            return None;
        }
        Some(targets.iter().map(|&k| self.attribute_scores[k]).sum::<f64>() / targets.len() as f64)
    }
}

/// Conditioning tokens: the explicit prompt if given, otherwise the first
/// `anchor_len` content tokens of the source.
pub fn prompt_tokens(source_tokens: &[String], config: &DecodeConfig) -> Vec<String> {
    if !config.prompt_prefix.is_empty() {
        return config.prompt_prefix.clone();
    }
    let content = content_tokens(source_tokens);
    content[..config.anchor_len.min(content.len())].to_vec()
}

/// Guide scores of a finished headline: content tokens plus `.`, complete.
pub fn final_scores(tokens: &[String], providers: Providers<'_>) -> (f64, [f64; TACTIC_COUNT]) {
    let mut ids = providers.vocab.ids(content_tokens(tokens));
    ids.push(PERIOD);
    (
        providers.clickbait.clickbait_score(&ids, true),
        providers.engagement.attribute_scores(&ids, true),
    )
}

/// Step-local generator: one seed per rewrite, one stream per step.
pub fn step_rng(seed: u64, step: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(step as u64);
    rng
}

pub fn rewrite(source: &str, config: &DecodeConfig, providers: Providers<'_>) -> Result<RewriteResult> {
    config.validate()?;
    let source_tokens = tokenize(source)?;
    if content_tokens(&source_tokens).is_empty() {
        return Err(Error::EmptyInput("source headline"));
    }
    let prompt = prompt_tokens(&source_tokens, config);
    let mut ids = providers.vocab.ids(&prompt);
    let mut tokens = prompt.clone();
    let mut trace = Vec::new();
    let mut logprob = 0.0;
    let mut completed = false;
    for step in 0..config.max_len {
        let mut rng = step_rng(config.seed, step);
        let (chosen, candidates) = decode_step(&ids, providers, config, &mut rng).map_err(|e| Error::Decode {
            step,
            source: Box::new(e),
        })?;
        let c = candidates.iter().find(|c| c.token_id == chosen).expect("chosen from candidates");
        logprob += c.base_logprob;
        tokens.push(c.token.clone());
        ids.push(chosen);
        trace.push(StepTrace { step, chosen, candidates });
        if chosen == PERIOD {
            completed = true;
            break;
        }
    }
    if trace.is_empty() {
        return Err(Error::EmptyInput("no tokens generated"));
    }
    let (clickbait_score, attribute_scores) = final_scores(&tokens, providers);
    let mut text_tokens = content_tokens(&tokens).to_vec();
    text_tokens.push(PERIOD_STR.to_string());
    Ok(RewriteResult {
        source: source.to_string(),
        text: detokenize(&text_tokens),
        prompt_len: prompt.len(),
        completed,
        fidelity: fidelity(&source_tokens, &tokens),
        s_pos: positive_guidance(&attribute_scores, &config.omega),
        tokens,
        trace,
        clickbait_score,
        attribute_scores,
        logprob,
        config: config.clone(),
    })
}
