//! End-to-end helpers: neutral corpus to split-tagged labeled records, and
//! labeled records to a trained model bundle on disk.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{expand_prefixes, split_by_source, HeadlineRecord, PrefixExample, Split};
use crate::decoder::Providers;
use crate::error::{Error, Result};
use crate::guides::{train_guide, ClickbaitGuide, EngagementGuide, GuideKind, GuideModel, TrainConfig};
use crate::lm::{build_vocab, train_ngram, CandidateProvider, NgramModel, Vocab};
use crate::synthgen::{synthesize, GeneratorKind, TextCompleter, UNIFORM_TARGETS};

pub const DEFAULT_SPLIT: [f64; 3] = [0.65, 0.15, 0.20];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub split_fractions: [f64; 3],
    pub split_seed: u64,
    pub synth_seed: u64,
    pub size_targets: [f64; 3],
    pub vocab_min_count: usize,
    pub lm_order: usize,
    pub lm_discount: f64,
    pub guide: TrainConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            split_fractions: DEFAULT_SPLIT,
            split_seed: 0,
            synth_seed: 0,
            size_targets: UNIFORM_TARGETS,
            vocab_min_count: 2,
            lm_order: 3,
            lm_discount: 0.75,
            guide: TrainConfig::default(),
        }
    }
}

/// Tags every neutral record with its source split, then adds one
/// clickbait variant per source. Variants inherit the split.
pub fn label_corpus(
    mut neutrals: Vec<HeadlineRecord>,
    config: &PipelineConfig,
    generator: GeneratorKind,
    completer: Option<&dyn TextCompleter>,
) -> Result<Vec<HeadlineRecord>> {
    let assignment = split_by_source(
        neutrals.iter().map(|r| r.source_id.clone()),
        config.split_fractions,
        config.split_seed,
    )?;
    for r in &mut neutrals {
        r.split = assignment.get(&r.source_id);
    }
    let variants = synthesize(&neutrals, generator, &config.size_targets, config.synth_seed, completer, 8)?;
    neutrals.extend(variants);
    Ok(neutrals)
}

pub fn in_split(records: &[HeadlineRecord], split: Split) -> Vec<HeadlineRecord> {
    records.iter().filter(|r| r.split == Some(split)).cloned().collect()
}

pub fn expand_all(records: &[HeadlineRecord]) -> Result<Vec<PrefixExample>> {
    let mut out = Vec::new();
    for r in records {
        out.extend(expand_prefixes(r)?);
    }
    Ok(out)
}

/// Base model plus both guides, all bound to one vocabulary.
#[derive(Debug, Clone)]
pub struct ModelBundle {
    pub lm: NgramModel,
    pub clickbait: ClickbaitGuide,
    pub engagement: EngagementGuide,
}

pub const LM_FILE: &str = "lm.json";
pub const CLICKBAIT_FILE: &str = "clickbait.json";
pub const ENGAGEMENT_FILE: &str = "engagement.json";

impl ModelBundle {
    pub fn new(lm: NgramModel, clickbait: GuideModel, engagement: GuideModel) -> Result<Self> {
        clickbait.space().check_vocab(lm.vocab())?;
        engagement.space().check_vocab(lm.vocab())?;
        Ok(ModelBundle {
            lm,
            clickbait: clickbait.try_into()?,
            engagement: engagement.try_into()?,
        })
    }

    pub fn vocab(&self) -> &Vocab {
        self.lm.vocab()
    }

    pub fn providers(&self) -> Providers<'_> {
        self.providers_with(&self.lm)
    }

    /// Same guides over a different base model (for example a remote one).
    pub fn providers_with<'a>(&'a self, base: &'a dyn CandidateProvider) -> Providers<'a> {
        Providers {
            vocab: self.lm.vocab(),
            base,
            clickbait: &self.clickbait,
            engagement: &self.engagement,
        }
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.lm.save(&dir.join(LM_FILE))?;
        self.clickbait.model().save(&dir.join(CLICKBAIT_FILE))?;
        self.engagement.model().save(&dir.join(ENGAGEMENT_FILE))?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        Self::new(
            NgramModel::load(&dir.join(LM_FILE))?,
            GuideModel::load(&dir.join(CLICKBAIT_FILE))?,
            GuideModel::load(&dir.join(ENGAGEMENT_FILE))?,
        )
    }
}

/// Vocabulary and base model from the train split (neutral and clickbait
/// records alike), then both guides on train prefixes with validation
/// prefixes for early stopping. The guides train concurrently.
pub fn train_models(records: &[HeadlineRecord], config: &PipelineConfig) -> Result<ModelBundle> {
    let train = in_split(records, Split::Train);
    let val = in_split(records, Split::Validation);
    if train.is_empty() {
        return Err(Error::EmptyInput("train split"));
    }
    if val.is_empty() {
        return Err(Error::EmptyInput("validation split"));
    }
    let vocab = build_vocab(&train, config.vocab_min_count)?;
    let train_px = expand_all(&train)?;
    let val_px = expand_all(&val)?;
    let (cb, en) = std::thread::scope(|s| {
        let cb = s.spawn(|| train_guide(GuideKind::Clickbait, &vocab, &train_px, &val_px, config.guide));
        let en = s.spawn(|| train_guide(GuideKind::Engagement, &vocab, &train_px, &val_px, config.guide));
        (
            cb.join().expect("clickbait training panicked"),
            en.join().expect("engagement training panicked"),
        )
    });
    let lm = train_ngram(&train, vocab, config.lm_order, config.lm_discount)?;
    ModelBundle::new(lm, cb?, en?)
}
