//! Prefix guide models: a binary clickbait scorer and a ten-output
//! engagement attribute model, both linear with sigmoid outputs over sparse
//! n-gram features.

mod features;
mod metrics;
mod model;
mod objective;
mod train;

pub use features::{length_bucket, FeatureSpace, FeatureVector, BIAS, COMPLETE_FLAG, LENGTH_BUCKETS};
pub use metrics::{argmax, auroc, clickbait_auroc, evaluate_single_tactic, EvalReport};
pub use model::{
    AttributeScorer, ClickbaitGuide, ClickbaitScorer, EngagementGuide, GuideKind, GuideModel, GUIDE_FORMAT,
};
pub use objective::{bce_with_logit, example_loss, sigmoid, weighted_loss, weighted_loss_gradient, Encoded};
pub use train::{encode, targets_for, train_encoded, train_guide, TrainConfig, TrainingHistory, MAX_EPOCHS};
