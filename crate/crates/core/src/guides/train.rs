use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::FeatureSpace;
use super::model::{GuideKind, GuideModel};
use super::objective::{example_loss, sigmoid, weighted_loss, Encoded};
use crate::corpus::PrefixExample;
use crate::error::{Error, Result};
use crate::lm::{TokenId, Vocab};

pub const MAX_EPOCHS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Decoupled weight decay: every update shrinks weights by
    /// `learning_rate * l2` before the gradient step.
    pub l2: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: MAX_EPOCHS,
            learning_rate: 0.1,
            l2: 1e-6,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_EPOCHS).contains(&self.epochs) {
            return Err(Error::invalid(format!("epochs must be in 1..={MAX_EPOCHS}, got {}", self.epochs)));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) || self.learning_rate * self.l2 >= 1.0 {
            return Err(Error::invalid("l2 must be non-negative and lr * l2 below 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingHistory {
    /// Weighted training loss after each completed epoch.
    pub train_losses: Vec<f64>,
    pub val_losses: Vec<f64>,
    /// 1-based epoch of the returned snapshot.
    pub best_epoch: usize,
}

impl TrainingHistory {
    pub fn best_val_loss(&self) -> Option<f64> {
        self.val_losses.get(self.best_epoch.checked_sub(1)?).copied()
    }
}

pub fn targets_for(kind: GuideKind, ex: &PrefixExample) -> Vec<f64> {
    match kind {
        GuideKind::Clickbait => vec![if ex.clickbait { 1.0 } else { 0.0 }],
        GuideKind::Engagement => ex.attributes.as_targets().to_vec(),
    }
}

fn example_ids(vocab: &Vocab, ex: &PrefixExample) -> Vec<TokenId> {
    vocab.ids(&ex.tokens)
}

pub fn encode(kind: GuideKind, space: &FeatureSpace, vocab: &Vocab, examples: &[PrefixExample]) -> Result<Vec<Encoded>> {
    space.check_vocab(vocab)?;
    examples
        .iter()
        .map(|ex| {
            if !(ex.weight.is_finite() && ex.weight > 0.0) {
                return Err(Error::invalid(format!("{}: weight {} not in (0, 1]", ex.record_id, ex.weight)));
            }
            Ok(Encoded {
                features: space.featurize(&example_ids(vocab, ex), ex.is_complete),
                targets: targets_for(kind, ex),
                weight: ex.weight,
            })
        })
        .collect()
}

/// Dense weights stored as `scale * raw` so that weight decay costs O(1)
/// per update instead of O(dim).
struct ScaledHeads {
    raw: Vec<Vec<f64>>,
    scale: f64,
}

impl ScaledHeads {
    fn new(outputs: usize, dim: usize) -> Self {
        ScaledHeads {
            raw: vec![vec![0.0; dim]; outputs],
            scale: 1.0,
        }
    }

    fn materialize(&self) -> Vec<Vec<f64>> {
        self.raw
            .iter()
            .map(|h| h.iter().map(|w| w * self.scale).collect())
            .collect()
    }

    fn step(&mut self, ex: &Encoded, lr: f64, decay: f64) {
        self.scale *= 1.0 - lr * decay;
        if self.scale < 1e-9 {
            for h in &mut self.raw {
                h.iter_mut().for_each(|w| *w *= self.scale);
            }
            self.scale = 1.0;
        }
        for (h, &y) in self.raw.iter_mut().zip(&ex.targets) {
            let z = self.scale * ex.features.dot(h);
            let g = ex.weight * (sigmoid(z) - y);
            let delta = lr * g / self.scale;
            for &(i, v) in &ex.features.entries {
                h[i as usize] -= delta * v;
            }
        }
    }
}

/// Per-example SGD over the shuffled prefix pool with decoupled L2.
/// Validation loss is measured after every epoch; training stops at the
/// first epoch that does not improve it and the best snapshot is returned.
pub fn train_guide(
    kind: GuideKind,
    vocab: &Vocab,
    train: &[PrefixExample],
    validation: &[PrefixExample],
    config: TrainConfig,
) -> Result<GuideModel> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyInput("training prefixes"));
    }
    if validation.is_empty() {
        return Err(Error::EmptyInput("validation prefixes"));
    }
    let train_ids: Vec<Vec<TokenId>> = train.iter().map(|ex| example_ids(vocab, ex)).collect();
    let space = FeatureSpace::build(vocab, train_ids.iter().map(Vec::as_slice));
    let train_enc = encode(kind, &space, vocab, train)?;
    let val_enc = encode(kind, &space, vocab, validation)?;
    train_encoded(kind, space, &train_enc, &val_enc, config)
}

pub fn train_encoded(
    kind: GuideKind,
    space: FeatureSpace,
    train: &[Encoded],
    validation: &[Encoded],
    config: TrainConfig,
) -> Result<GuideModel> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut heads = ScaledHeads::new(kind.outputs(), space.dim());
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = TrainingHistory::default();
    let mut best: Option<Vec<Vec<f64>>> = None;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for (n, &i) in order.iter().enumerate() {
            heads.step(&train[i], config.learning_rate, config.l2);
            if n % 4096 == 0 {
                let snapshot = heads.materialize();
                let loss = example_loss(&snapshot, &train[i]);
                if !loss.is_finite() {
                    return Err(Error::NonFinite(format!(
                        "training loss {loss} at epoch {epoch}, update {n} (example {i})"
                    )));
                }
            }
        }
        let snapshot = heads.materialize();
        let train_loss = weighted_loss(&snapshot, train);
        if !train_loss.is_finite() {
            return Err(Error::NonFinite(format!("training loss {train_loss} after epoch {epoch}")));
        }
        let val_loss = weighted_loss(&snapshot, validation);
        if !val_loss.is_finite() {
            return Err(Error::NonFinite(format!("validation loss {val_loss} after epoch {epoch}")));
        }
        history.train_losses.push(train_loss);
        history.val_losses.push(val_loss);
        let improved = history.best_val_loss().is_none_or(|b| val_loss < b);
        if improved {
            history.best_epoch = epoch;
            best = Some(snapshot);
        } else {
            break;
        }
    }
    let heads = best.expect("at least one epoch runs");
    Ok(GuideModel::from_heads(kind, space, heads, config, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rubric::AttributeVector;

    fn vocab() -> Vocab {
        let t = ["<s>", "</s>", "<unk>", ".", "good", "bad", "news", "today"];
        Vocab::from_tokens(t.iter().map(|s| s.to_string()).collect(), 1).unwrap()
    }

    fn ex(tokens: &[&str], clickbait: bool, weight: f64) -> PrefixExample {
        let complete = tokens.last() == Some(&".");
        PrefixExample {
            record_id: "r".into(),
            source_id: "s".into(),
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
            t: tokens.len() - complete as usize,
            total: tokens.len() - complete as usize,
            is_complete: complete,
            clickbait,
            attributes: AttributeVector::empty(),
            weight,
            split: None,
        }
    }

    #[test]
    fn separable_toy_set() {
        let v = vocab();
        let mut data = Vec::new();
        for _ in 0..50 {
            data.push(ex(&["good"], false, 1.0));
            data.push(ex(&["bad"], true, 1.0));
        }
        let m = train_guide(GuideKind::Clickbait, &v, &data, &data, TrainConfig::default()).unwrap();
        let acc = data
            .iter()
            .filter(|e| {
                let p = m.score_clickbait(&v.ids(&e.tokens), e.is_complete).unwrap();
                (p > 0.5) == e.clickbait
            })
            .count();
        assert_eq!(acc, data.len());
    }

    #[test]
    fn constant_labels() {
        let v = vocab();
        let data: Vec<_> = (0..20).map(|_| ex(&["news", "today"], true, 0.5)).collect();
        let m = train_guide(GuideKind::Clickbait, &v, &data, &data, TrainConfig::default()).unwrap();
        for probe in [&["good"][..], &["bad", "news", "."][..], &["today"][..]] {
            let complete = probe.last() == Some(&".");
            assert!(m.score_clickbait(&v.ids(probe), complete).unwrap() > 0.5);
        }
    }

    #[test]
    fn best_snapshot_returned() {
        let v = vocab();
        let train: Vec<_> = (0..30)
            .flat_map(|i| [ex(&["good", "news"], i % 7 == 0, 1.0), ex(&["bad", "today"], i % 5 != 0, 1.0)])
            .collect();
        let val = vec![ex(&["good", "today"], true, 1.0), ex(&["bad", "news"], false, 1.0)];
        let m = train_guide(GuideKind::Clickbait, &v, &train, &val, TrainConfig::default()).unwrap();
        let best = m.history.best_val_loss().unwrap();
        assert!(m.history.val_losses.iter().all(|&l| best <= l));
        let enc = encode(GuideKind::Clickbait, m.space(), &v, &val).unwrap();
        assert!((weighted_loss(m.heads(), &enc) - best).abs() < 1e-12);
    }

    #[test]
    fn deterministic_for_seed() {
        let v = vocab();
        let data: Vec<_> = (0..40).map(|i| ex(&["good", "bad"][i % 2..i % 2 + 1], i % 2 == 1, 1.0)).collect();
        let cfg = TrainConfig { seed: 9, ..TrainConfig::default() };
        let a = train_guide(GuideKind::Clickbait, &v, &data, &data, cfg).unwrap();
        let b = train_guide(GuideKind::Clickbait, &v, &data, &data, cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_config_and_empty_splits() {
        let v = vocab();
        let data = vec![ex(&["good"], false, 1.0)];
        let cfg = TrainConfig { epochs: 4, ..TrainConfig::default() };
        assert!(train_guide(GuideKind::Clickbait, &v, &data, &data, cfg).is_err());
        assert!(train_guide(GuideKind::Clickbait, &v, &[], &data, TrainConfig::default()).is_err());
        assert!(train_guide(GuideKind::Clickbait, &v, &data, &[], TrainConfig::default()).is_err());
    }

    #[test]
    fn non_finite_loss_aborts() {
        let v = vocab();
        let data = vec![ex(&["good"], false, 1.0), ex(&["bad"], true, 1.0)];
        let cfg = TrainConfig { learning_rate: f64::MAX, l2: 0.0, ..TrainConfig::default() };
        assert!(matches!(
            train_guide(GuideKind::Clickbait, &v, &data, &data, cfg),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn down_weighted_noise_hurts_less() {
        // A mislabeled short prefix duplicated many times: weighting it at
        // the floor should leave clean validation loss no worse than
        // weighting it fully.
        let v = vocab();
        let mut clean = Vec::new();
        for _ in 0..40 {
            clean.push(ex(&["good", "news", "today", "."], false, 1.0));
            clean.push(ex(&["bad", "news", "today", "."], true, 1.0));
        }
        let noisy = |w: f64| {
            let mut d = clean.clone();
            d.extend((0..40).map(|_| ex(&["good"], true, w)));
            d
        };
        let val = vec![ex(&["good", "."], false, 1.0), ex(&["bad", "."], true, 1.0)];
        let loss_of = |w: f64| {
            let m = train_guide(GuideKind::Clickbait, &v, &noisy(w), &clean, TrainConfig::default()).unwrap();
            let enc = encode(GuideKind::Clickbait, m.space(), &v, &val).unwrap();
            weighted_loss(m.heads(), &enc)
        };
        assert!(loss_of(0.2) <= loss_of(1.0));
    }
}
