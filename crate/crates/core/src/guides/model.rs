use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::{FeatureSpace, FeatureVector};
use super::objective::sigmoid;
use super::train::{TrainConfig, TrainingHistory};
use crate::error::{Error, Result};
use crate::lm::{TokenId, Vocab};
use crate::rubric::TACTIC_COUNT;

pub const GUIDE_FORMAT: &str = "clickwise-guide/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuideKind {
    /// One output: probability that the prefix is clickbait.
    Clickbait,
    /// Ten independent outputs, one per rubric tactic.
    Engagement,
}

impl GuideKind {
    pub fn outputs(self) -> usize {
        match self {
            GuideKind::Clickbait => 1,
            GuideKind::Engagement => TACTIC_COUNT,
        }
    }
}

/// A trained linear prefix scorer with sigmoid outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuideModel {
    format: String,
    pub kind: GuideKind,
    space: FeatureSpace,
    heads: Vec<Vec<f64>>,
    pub config: TrainConfig,
    pub history: TrainingHistory,
}

impl GuideModel {
    /// All-zero weights; every output is 0.5.
    pub fn zeros(kind: GuideKind, space: FeatureSpace) -> Self {
        let heads = vec![vec![0.0; space.dim()]; kind.outputs()];
        Self::from_heads(kind, space, heads, TrainConfig::default(), TrainingHistory::default())
    }

    pub(crate) fn from_heads(
        kind: GuideKind,
        space: FeatureSpace,
        heads: Vec<Vec<f64>>,
        config: TrainConfig,
        history: TrainingHistory,
    ) -> Self {
        GuideModel {
            format: GUIDE_FORMAT.to_string(),
            kind,
            space,
            heads,
            config,
            history,
        }
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn heads(&self) -> &[Vec<f64>] {
        &self.heads
    }

    pub fn featurize(&self, ids: &[TokenId], is_complete: bool) -> FeatureVector {
        self.space.featurize(ids, is_complete)
    }

    pub fn probabilities(&self, ids: &[TokenId], is_complete: bool) -> Vec<f64> {
        let f = self.featurize(ids, is_complete);
        self.heads.iter().map(|w| sigmoid(f.dot(w))).collect()
    }

    fn expect_kind(&self, kind: GuideKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::invalid(format!("expected a {kind:?} guide, got {:?}", self.kind)));
        }
        Ok(())
    }

    pub fn score_clickbait(&self, ids: &[TokenId], is_complete: bool) -> Result<f64> {
        self.expect_kind(GuideKind::Clickbait)?;
        Ok(self.probabilities(ids, is_complete)[0])
    }

    pub fn score_attributes(&self, ids: &[TokenId], is_complete: bool) -> Result<[f64; TACTIC_COUNT]> {
        self.expect_kind(GuideKind::Engagement)?;
        let p = self.probabilities(ids, is_complete);
        let mut out = [0.0; TACTIC_COUNT];
        out.copy_from_slice(&p);
        Ok(out)
    }

    /// Scores a token-string prefix after checking that `vocab` is the one
    /// the feature space was built on.
    pub fn probabilities_for_tokens<S: AsRef<str>>(&self, vocab: &Vocab, tokens: &[S], is_complete: bool) -> Result<Vec<f64>> {
        self.space.check_vocab(vocab)?;
        Ok(self.probabilities(&vocab.ids(tokens), is_complete))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let model: GuideModel = serde_json::from_reader(std::io::BufReader::new(file))?;
        if model.format != GUIDE_FORMAT {
            return Err(Error::VersionMismatch {
                expected: GUIDE_FORMAT.into(),
                found: model.format,
            });
        }
        if model.heads.len() != model.kind.outputs() || model.heads.iter().any(|h| h.len() != model.space.dim()) {
            return Err(Error::invalid("guide artifact weights do not match its feature space"));
        }
        Ok(model)
    }
}

/// Negative-guidance source for decoding.
pub trait ClickbaitScorer: Send + Sync {
    fn clickbait_score(&self, ids: &[TokenId], is_complete: bool) -> f64;
}

/// Positive-guidance source for decoding.
pub trait AttributeScorer: Send + Sync {
    fn attribute_scores(&self, ids: &[TokenId], is_complete: bool) -> [f64; TACTIC_COUNT];
}

/// A [`GuideModel`] known to be of kind [`GuideKind::Clickbait`].
#[derive(Debug, Clone)]
pub struct ClickbaitGuide(GuideModel);

/// A [`GuideModel`] known to be of kind [`GuideKind::Engagement`].
#[derive(Debug, Clone)]
pub struct EngagementGuide(GuideModel);

impl TryFrom<GuideModel> for ClickbaitGuide {
    type Error = Error;
    fn try_from(m: GuideModel) -> Result<Self> {
        m.expect_kind(GuideKind::Clickbait)?;
        Ok(ClickbaitGuide(m))
    }
}

impl TryFrom<GuideModel> for EngagementGuide {
    type Error = Error;
    fn try_from(m: GuideModel) -> Result<Self> {
        m.expect_kind(GuideKind::Engagement)?;
        Ok(EngagementGuide(m))
    }
}

impl ClickbaitGuide {
    pub fn model(&self) -> &GuideModel {
        &self.0
    }
}

impl EngagementGuide {
    pub fn model(&self) -> &GuideModel {
        &self.0
    }
}

impl ClickbaitScorer for ClickbaitGuide {
    fn clickbait_score(&self, ids: &[TokenId], is_complete: bool) -> f64 {
        self.0.probabilities(ids, is_complete)[0]
    }
}

impl AttributeScorer for EngagementGuide {
    fn attribute_scores(&self, ids: &[TokenId], is_complete: bool) -> [f64; TACTIC_COUNT] {
        let p = self.0.probabilities(ids, is_complete);
        let mut out = [0.0; TACTIC_COUNT];
        out.copy_from_slice(&p);
        out
    }
}
