//! Synthetic clickbait variants: one variant per neutral source, with one to
//! three tactics switched on.

mod llm;
mod prompt;
mod templates;

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{tokenize, HeadlineRecord};
use crate::error::{Error, Result};
use crate::rubric::{AttributeVector, TACTIC_COUNT};

pub use llm::{HttpCompleter, LlmClientConfig, TextCompleter};
pub use prompt::{build_prompt, PROMPT_TACTICS};
pub use templates::{apply_rule_transform, TacticTemplate, TEMPLATES};

/// Desired shares of variants with 1, 2 and 3 active tactics.
pub const UNIFORM_TARGETS: [f64; 3] = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Template,
    LlmClient,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationPlan {
    pub source_id: String,
    pub tactic_set: BTreeSet<usize>,
    pub generator: GeneratorKind,
    pub seed: u64,
}

impl GenerationPlan {
    pub fn new(source_id: impl Into<String>, tactics: impl IntoIterator<Item = usize>, generator: GeneratorKind) -> Result<Self> {
        let tactic_set: BTreeSet<usize> = tactics.into_iter().collect();
        if tactic_set.is_empty() || tactic_set.len() > 3 {
            return Err(Error::invalid(format!("tactic set must hold 1..=3 ids, got {tactic_set:?}")));
        }
        if tactic_set.iter().any(|&i| i >= TACTIC_COUNT) {
            return Err(Error::invalid(format!("tactic id out of range in {tactic_set:?}")));
        }
        Ok(GenerationPlan {
            source_id: source_id.into(),
            tactic_set,
            generator,
            seed: 0,
        })
    }

    fn ids(&self) -> Vec<usize> {
        self.tactic_set.iter().copied().collect()
    }
}

fn check_targets(targets: &[f64; 3]) -> Result<()> {
    let sum: f64 = targets.iter().sum();
    if targets.iter().any(|t| !t.is_finite() || *t < 0.0) || (sum - 1.0).abs() > 1e-6 {
        return Err(Error::invalid(format!("composition targets {targets:?} must be non-negative and sum to 1")));
    }
    Ok(())
}

/// Draws a subset size from `targets`, then that many distinct tactic ids
/// uniformly without replacement.
pub fn sample_tactic_subset<R: Rng + ?Sized>(rng: &mut R, targets: &[f64; 3]) -> Result<BTreeSet<usize>> {
    check_targets(targets)?;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut size = 3;
    for (i, t) in targets.iter().enumerate() {
        acc += t;
        if u < acc {
            size = i + 1;
            break;
        }
    }
    // guard against rounding leaving u >= acc with trailing zero targets
    while targets[size - 1] == 0.0 {
        size -= 1;
    }
    Ok(sample(rng, TACTIC_COUNT, size).into_iter().collect())
}

/// Per-source RNG so a plan depends only on `(seed, source_id)`, not on the
/// position of the source in the input.
pub fn source_rng(seed: u64, source_id: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(source_id.as_bytes());
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

pub fn plan_for(neutral: &HeadlineRecord, generator: GeneratorKind, targets: &[f64; 3], seed: u64) -> Result<GenerationPlan> {
    let mut rng = source_rng(seed, &neutral.source_id);
    let tactic_set = sample_tactic_subset(&mut rng, targets)?;
    Ok(GenerationPlan {
        source_id: neutral.source_id.clone(),
        tactic_set,
        generator,
        seed,
    })
}

/// Produces the clickbait variant of `neutral` described by `plan`. The
/// completer is only consulted on the LLM path.
pub fn generate_variant(
    neutral: &HeadlineRecord,
    plan: &GenerationPlan,
    completer: Option<&dyn TextCompleter>,
) -> Result<HeadlineRecord> {
    if neutral.clickbait {
        return Err(Error::invalid(format!("{} is not a neutral record", neutral.record_id)));
    }
    let ids = plan.ids();
    let text = match plan.generator {
        GeneratorKind::Template => apply_rule_transform(&neutral.text, &ids)?,
        GeneratorKind::LlmClient => {
            let completer = completer.ok_or_else(|| Error::invalid("llm generator requires a client"))?;
            completer.complete(&build_prompt(&neutral.text, &ids)?)?.trim().to_string()
        }
    };
    if text.is_empty() {
        return Err(Error::EmptyInput("generator returned empty text"));
    }
    let tokens = tokenize(&text)?;
    Ok(HeadlineRecord {
        record_id: format!("{}-cb", neutral.source_id),
        source_id: neutral.source_id.clone(),
        text,
        tokens,
        clickbait: true,
        attributes: AttributeVector::from_ids(ids)?,
        split: neutral.split,
    })
}

/// Generates exactly one variant per neutral record. LLM calls run on up to
/// `max_in_flight` threads; output order follows input order either way.
pub fn synthesize(
    neutrals: &[HeadlineRecord],
    generator: GeneratorKind,
    targets: &[f64; 3],
    seed: u64,
    completer: Option<&dyn TextCompleter>,
    max_in_flight: usize,
) -> Result<Vec<HeadlineRecord>> {
    check_targets(targets)?;
    let plans = neutrals
        .iter()
        .map(|n| plan_for(n, generator, targets, seed))
        .collect::<Result<Vec<_>>>()?;
    if generator == GeneratorKind::Template || max_in_flight <= 1 {
        return neutrals
            .iter()
            .zip(&plans)
            .map(|(n, p)| generate_variant(n, p, completer))
            .collect();
    }
    let chunk = neutrals.len().div_ceil(max_in_flight).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = neutrals
            .chunks(chunk)
            .zip(plans.chunks(chunk))
            .map(|(ns, ps)| {
                s.spawn(move || {
                    ns.iter()
                        .zip(ps)
                        .map(|(n, p)| generate_variant(n, p, completer))
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        let mut out = Vec::with_capacity(neutrals.len());
        for h in handles {
            out.extend(h.join().expect("generation thread panicked")?);
        }
        Ok(out)
    })
}

/// Histogram of records by number of active tactics (0 to 3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CompositionReport {
    pub counts: [usize; 4],
}

impl CompositionReport {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("active_tactics,count\n");
        for (k, c) in self.counts.iter().enumerate() {
            s.push_str(&format!("{k},{c}\n"));
        }
        s
    }
}

pub fn composition_report(records: &[HeadlineRecord]) -> Result<CompositionReport> {
    let mut report = CompositionReport::default();
    for r in records {
        let k = r.attributes.popcount();
        if k > 3 {
            return Err(Error::AttributeViolation { class: "clickbait", popcount: k });
        }
        report.counts[k] += 1;
    }
    Ok(report)
}
