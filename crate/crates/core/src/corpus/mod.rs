//! Source corpus handling: ingestion, leakage-free splits, prefix expansion
//! and the line-delimited JSON dataset format.

mod dataset;
mod ingest;
mod prefix;
mod split;
mod tokenize;
pub mod wire;

use serde::{Deserialize, Serialize};

use crate::rubric::AttributeVector;

pub use dataset::{read_dataset, read_jsonl, write_dataset, write_jsonl};
pub use ingest::{ingest_neutral_corpus, ingest_neutral_reader};
pub use prefix::{content_tokens, example_weight, expand_prefixes, PrefixExample, MIN_WEIGHT};
pub use split::{split_by_source, SplitAssignment};
pub use tokenize::{detokenize, tokenize, ELLIPSIS, PERIOD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

/// A labeled headline. Neutral records carry an all-zero attribute vector;
/// clickbait variants point back at their neutral source through
/// `source_id` and inherit its split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadlineRecord {
    pub record_id: String,
    pub source_id: String,
    pub text: String,
    pub tokens: Vec<String>,
    #[serde(with = "bool_as_int")]
    pub clickbait: bool,
    #[serde(deserialize_with = "dataset::attributes_from_json")]
    pub attributes: AttributeVector,
    pub split: Option<Split>,
}

impl HeadlineRecord {
    pub fn neutral(source_id: String, text: String, tokens: Vec<String>) -> Self {
        HeadlineRecord {
            record_id: format!("{source_id}-n"),
            source_id,
            text,
            tokens,
            clickbait: false,
            attributes: AttributeVector::empty(),
            split: None,
        }
    }
}

pub(crate) mod bool_as_int {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(*v as u8)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(serde::de::Error::custom(format!("expected 0 or 1, got {other}"))),
        }
    }
}
