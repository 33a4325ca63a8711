//! The fixed engagement-attribute taxonomy.
//!
//! Ten headline mechanisms, each with a clickbait reading (disproportionate
//! use) and a clickability reading (proportionate, content-faithful use).
//! The canonical order below is also the order in which rewrite templates are
//! composed, so tactic ids double as composition priority.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of tactics in the rubric.
pub const TACTIC_COUNT: usize = 10;

/// One rubric row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TacticDescriptor {
    pub id: usize,
    pub name: &'static str,
    pub attribute: &'static str,
    pub clickbait_label: &'static str,
    pub clickbait_description: &'static str,
    pub clickability_label: &'static str,
    pub clickability_description: &'static str,
}

static TACTICS: [TacticDescriptor; TACTIC_COUNT] = [
    TacticDescriptor {
        id: 0,
        name: "information_gap_control",
        attribute: "Information gap control",
        clickbait_label: "Curiosity gap",
        clickbait_description: "Leaves out the key fact so the reader must click to find it",
        clickability_label: "Information gap calibration",
        clickability_description: "States the main fact and leaves some detail for the story to supply",
    },
    TacticDescriptor {
        id: 1,
        name: "emphasis_intensity",
        attribute: "Emphasis intensity",
        clickbait_label: "Exaggeration",
        clickbait_description: "Claims more weight, reach or certainty than the story can back up",
        clickability_label: "Proportional emphasis scaling",
        clickability_description: "Uses strong wording only as far as the event warrants",
    },
    TacticDescriptor {
        id: 2,
        name: "emotional_framing",
        attribute: "Emotional framing",
        clickbait_label: "Emotional trigger",
        clickbait_description: "Stirs up fear, anger or thrill out of proportion to what happened",
        clickability_label: "Affective salience framing",
        clickability_description: "Points to the human stakes already present in the story, without inflating them",
    },
    TacticDescriptor {
        id: 3,
        name: "saliency_allocation",
        attribute: "Saliency allocation",
        clickbait_label: "Sensationalism",
        clickbait_description: "Leads with a lurid or minor detail and crowds out the substance",
        clickability_label: "Saliency-oriented framing",
        clickability_description: "Puts the most newsworthy element first and keeps its context intact",
    },
    TacticDescriptor {
        id: 4,
        name: "structural_emphasis",
        attribute: "Structural emphasis",
        clickbait_label: "Lists or superlatives",
        clickbait_description: "Casts the story as a record, a top-N list or the most extreme case",
        clickability_label: "Structured highlighting",
        clickability_description: "Uses counts or comparisons to structure information that supports them",
    },
    TacticDescriptor {
        id: 5,
        name: "referential_clarity",
        attribute: "Referential clarity",
        clickbait_label: "Ambiguous references",
        clickbait_description: "Hides who or what the story is about behind vague words",
        clickability_label: "Referential under-specification",
        clickability_description: "Keeps a reference general for a moment, then resolves it honestly",
    },
    TacticDescriptor {
        id: 6,
        name: "reader_addressing",
        attribute: "Reader addressing",
        clickbait_label: "Direct appeals",
        clickbait_description: "Orders or pressures the reader to click",
        clickability_label: "Reader relevance cues",
        clickability_description: "Makes plain why the story is relevant to the reader",
    },
    TacticDescriptor {
        id: 7,
        name: "narrative_structure",
        attribute: "Narrative structure",
        clickbait_label: "Unfinished narratives",
        clickbait_description: "Breaks off before the outcome to manufacture suspense",
        clickability_label: "Narrative continuation cues",
        clickability_description: "Signals that more detail follows but still gives the outcome",
    },
    TacticDescriptor {
        id: 8,
        name: "conceptual_framing",
        attribute: "Conceptual framing",
        clickbait_label: "Unexpected associations",
        clickbait_description: "Bolts the story onto an unrelated idea in a way that misleads",
        clickability_label: "Cross-domain framing",
        clickability_description: "Draws a fresh comparison that the facts actually support",
    },
    TacticDescriptor {
        id: 9,
        name: "interrogative_form",
        attribute: "Interrogative form",
        clickbait_label: "Provocative questions",
        clickbait_description: "Asks a question built on a false premise or inflated stakes",
        clickability_label: "Interrogative framing",
        clickability_description: "Asks a question that reflects real open uncertainty",
    },
];

/// All ten descriptors in canonical id order.
pub fn list_tactics() -> &'static [TacticDescriptor] {
    &TACTICS
}

pub fn tactic(id: usize) -> Option<&'static TacticDescriptor> {
    TACTICS.get(id)
}

/// Resolves a machine key such as `emphasis_intensity` to its id.
pub fn tactic_id(name: &str) -> Result<usize> {
    TACTICS
        .iter()
        .position(|t| t.name == name)
        .ok_or_else(|| Error::UnknownTactic(name.to_string()))
}

/// Binary per-tactic flags, serialized as a 10-element integer array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct AttributeVector([bool; TACTIC_COUNT]);

impl AttributeVector {
    pub const fn empty() -> Self {
        AttributeVector([false; TACTIC_COUNT])
    }

    pub fn from_ids<I: IntoIterator<Item = usize>>(ids: I) -> Result<Self> {
        let mut v = Self::empty();
        for id in ids {
            if id >= TACTIC_COUNT {
                return Err(Error::invalid(format!("tactic id {id} out of range")));
            }
            v.0[id] = true;
        }
        Ok(v)
    }

    pub fn get(&self, id: usize) -> bool {
        self.0[id]
    }

    pub fn set(&mut self, id: usize, on: bool) {
        self.0[id] = on;
    }

    pub fn popcount(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Active tactic ids in ascending order.
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    /// Labels as 0.0/1.0 targets.
    pub fn as_targets(&self) -> [f64; TACTIC_COUNT] {
        self.0.map(|b| if b { 1.0 } else { 0.0 })
    }
}

impl TryFrom<Vec<u8>> for AttributeVector {
    type Error = String;

    fn try_from(v: Vec<u8>) -> std::result::Result<Self, String> {
        if v.len() != TACTIC_COUNT {
            return Err(format!(
                "attribute vector must have {TACTIC_COUNT} entries, got {}",
                v.len()
            ));
        }
        let mut out = [false; TACTIC_COUNT];
        for (slot, x) in out.iter_mut().zip(&v) {
            *slot = match x {
                0 => false,
                1 => true,
                other => return Err(format!("attribute entries must be 0 or 1, got {other}")),
            };
        }
        Ok(AttributeVector(out))
    }
}

impl From<AttributeVector> for Vec<u8> {
    fn from(v: AttributeVector) -> Self {
        v.0.iter().map(|&b| b as u8).collect()
    }
}

impl From<[u8; TACTIC_COUNT]> for AttributeVector {
    fn from(v: [u8; TACTIC_COUNT]) -> Self {
        AttributeVector(v.map(|x| x != 0))
    }
}

impl fmt::Display for AttributeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", *b as u8)?;
        }
        write!(f, "]")
    }
}

/// Checks the popcount constraint for a record class: zero for neutral
/// headlines, one to three for clickbait variants.
pub fn validate_attribute_vector(v: &AttributeVector, expect_clickbait: bool) -> Result<()> {
    let popcount = v.popcount();
    let ok = if expect_clickbait {
        (1..=3).contains(&popcount)
    } else {
        popcount == 0
    };
    if ok {
        Ok(())
    } else {
        Err(Error::AttributeViolation {
            class: if expect_clickbait { "clickbait" } else { "neutral" },
            popcount,
        })
    }
}

/// The rubric as the JSON document served to clients.
pub fn rubric_json() -> serde_json::Value {
    serde_json::to_value(list_tactics()).expect("rubric serializes")
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn attribute_vector_validation(ids in proptest::collection::btree_set(0usize..TACTIC_COUNT, 0..=TACTIC_COUNT)) {
            let v = AttributeVector::from_ids(ids.iter().copied()).unwrap();
            prop_assert_eq!(v.popcount(), ids.len());
            prop_assert_eq!(v.active().collect::<Vec<_>>(), ids.iter().copied().collect::<Vec<_>>());
            prop_assert_eq!(validate_attribute_vector(&v, true).is_ok(), (1..=3).contains(&ids.len()));
            prop_assert_eq!(validate_attribute_vector(&v, false).is_ok(), ids.is_empty());
            let json = serde_json::to_string(&v).unwrap();
            prop_assert_eq!(serde_json::from_str::<AttributeVector>(&json).unwrap(), v);
        }
    }
}
