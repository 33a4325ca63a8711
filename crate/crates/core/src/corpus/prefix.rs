use serde::{Deserialize, Serialize};

use super::{HeadlineRecord, Split, PERIOD};
use crate::error::{Error, Result};
use crate::rubric::AttributeVector;

/// Weight floor for the shortest prefixes.
pub const MIN_WEIGHT: f64 = 0.2;

/// A training prefix `w_1..w_t` of a headline with `T` content tokens. The
/// `t = T` example is the only one carrying the trailing `.` marker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixExample {
    pub record_id: String,
    pub source_id: String,
    pub tokens: Vec<String>,
    pub t: usize,
    #[serde(rename = "T")]
    pub total: usize,
    pub is_complete: bool,
    #[serde(with = "super::bool_as_int")]
    pub clickbait: bool,
    #[serde(deserialize_with = "super::dataset::attributes_from_json")]
    pub attributes: AttributeVector,
    pub weight: f64,
    pub split: Option<Split>,
}

/// Length-aware loss weight: 1 for the complete headline, otherwise the
/// fraction of the headline seen so far, floored at [`MIN_WEIGHT`].
pub fn example_weight(t: usize, total: usize, is_complete: bool) -> Result<f64> {
    if t < 1 || t > total {
        return Err(Error::invalid(format!("prefix length {t} outside 1..={total}")));
    }
    if is_complete {
        return Ok(1.0);
    }
    Ok((t as f64 / total as f64).max(MIN_WEIGHT))
}

/// Drops trailing terminal punctuation (`.`, `!`, `?`).
pub fn content_tokens(tokens: &[String]) -> &[String] {
    let mut end = tokens.len();
    while end > 0 && matches!(tokens[end - 1].as_str(), "." | "!" | "?") {
        end -= 1;
    }
    &tokens[..end]
}

pub fn expand_prefixes(record: &HeadlineRecord) -> Result<Vec<PrefixExample>> {
    let content = content_tokens(&record.tokens);
    let total = content.len();
    if total == 0 {
        return Err(Error::EmptyInput("headline has no content tokens"));
    }
    (1..=total)
        .map(|t| {
            let is_complete = t == total;
            let mut tokens = content[..t].to_vec();
            if is_complete {
                tokens.push(PERIOD.to_string());
            }
            Ok(PrefixExample {
                record_id: record.record_id.clone(),
                source_id: record.source_id.clone(),
                tokens,
                t,
                total,
                is_complete,
                clickbait: record.clickbait,
                attributes: record.attributes,
                weight: example_weight(t, total, is_complete)?,
                split: record.split,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(tokens: &[&str]) -> HeadlineRecord {
        let tokens: Vec<String> = tokens.iter().map(|s| s.to_string()).collect();
        HeadlineRecord::neutral("s".into(), tokens.join(" "), tokens)
    }

    #[test]
    fn three_content_tokens() {
        let ex = expand_prefixes(&record(&["markets", "rally", "today", "."])).unwrap();
        let toks: Vec<Vec<&str>> = ex
            .iter()
            .map(|e| e.tokens.iter().map(String::as_str).collect())
            .collect();
        assert_eq!(
            toks,
            vec![
                vec!["markets"],
                vec!["markets", "rally"],
                vec!["markets", "rally", "today", "."]
            ]
        );
        let complete: Vec<bool> = ex.iter().map(|e| e.is_complete).collect();
        assert_eq!(complete, [false, false, true]);
    }

    #[test]
    fn single_token_headline() {
        let ex = expand_prefixes(&record(&["hello"])).unwrap();
        assert_eq!(ex.len(), 1);
        assert_eq!(ex[0].tokens, ["hello", "."]);
        assert!(ex[0].is_complete);
        assert_eq!(ex[0].weight, 1.0);
    }

    #[test]
    fn question_mark_is_replaced_by_marker() {
        let ex = expand_prefixes(&record(&["is", "it", "over", "?"])).unwrap();
        assert_eq!(ex.len(), 3);
        assert_eq!(ex[2].tokens, ["is", "it", "over", "."]);
    }

    #[test]
    fn punctuation_only_is_error() {
        assert!(expand_prefixes(&record(&["?", "!"])).is_err());
    }

    #[test]
    fn weights() {
        assert_eq!(example_weight(10, 10, true).unwrap(), 1.0);
        assert_eq!(example_weight(1, 10, false).unwrap(), 0.2);
        assert_eq!(example_weight(5, 10, false).unwrap(), 0.5);
        assert!((example_weight(7, 10, false).unwrap() - 0.7).abs() < 1e-15);
        assert!(example_weight(0, 10, false).is_err());
        assert!(example_weight(11, 10, false).is_err());
    }

    proptest! {
        #[test]
        fn expansion_invariants(words in proptest::collection::vec("[a-z]{1,6}", 1..20), end in 0usize..3) {
            let mut tokens = words.clone();
            match end { 1 => tokens.push(".".into()), 2 => tokens.push("?".into()), _ => {} }
            let rec = HeadlineRecord::neutral("s".into(), tokens.join(" "), tokens);
            let ex = expand_prefixes(&rec).unwrap();
            prop_assert_eq!(ex.len(), words.len());
            prop_assert_eq!(ex.iter().filter(|e| e.is_complete).count(), 1);
            let last = ex.last().unwrap();
            prop_assert_eq!(last.tokens.last().map(String::as_str), Some("."));
            let mut prev = 0.0;
            for e in &ex {
                prop_assert!(e.weight >= MIN_WEIGHT && e.weight <= 1.0);
                prop_assert!(e.weight >= prev);
                prev = e.weight;
                prop_assert_eq!(e.is_complete, e.tokens.last().map(String::as_str) == Some("."));
            }
        }
    }
}
