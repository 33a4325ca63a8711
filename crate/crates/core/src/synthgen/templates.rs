use crate::error::{Error, Result};
use crate::rubric::TACTIC_COUNT;

/// A deterministic rewrite for one tactic. `pattern` holds a single `{h}`
/// placeholder for the running headline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TacticTemplate {
    pub tactic_id: usize,
    pub pattern: &'static str,
    pub strip_terminal: bool,
}

pub static TEMPLATES: [TacticTemplate; TACTIC_COUNT] = [
    TacticTemplate { tactic_id: 0, pattern: "what is behind {h}?", strip_terminal: true },
    TacticTemplate { tactic_id: 1, pattern: "you won't believe {h}", strip_terminal: false },
    TacticTemplate { tactic_id: 2, pattern: "shocking: {h}", strip_terminal: false },
    TacticTemplate { tactic_id: 3, pattern: "drama erupts: {h}", strip_terminal: false },
    TacticTemplate { tactic_id: 4, pattern: "the 5 wildest facts about {h}", strip_terminal: false },
    TacticTemplate { tactic_id: 5, pattern: "what they aren't saying about {h}", strip_terminal: false },
    TacticTemplate { tactic_id: 6, pattern: "you need to see {h}", strip_terminal: false },
    TacticTemplate { tactic_id: 7, pattern: "{h}... and then it got worse", strip_terminal: false },
    TacticTemplate {
        tactic_id: 8,
        pattern: "{h} \u{2014} and what it means for your morning coffee",
        strip_terminal: false,
    },
    TacticTemplate { tactic_id: 9, pattern: "could {h} destroy everything?", strip_terminal: true },
];

impl TacticTemplate {
    pub fn apply(&self, headline: &str) -> String {
        let inner = if self.strip_terminal {
            headline.trim_end().trim_end_matches(['.', '!', '?'])
        } else {
            headline.trim_end()
        };
        self.pattern.replacen("{h}", inner, 1)
    }
}

/// Wraps the headline with each active tactic's template in ascending id
/// order, so the highest id ends up outermost.
pub fn apply_rule_transform(headline: &str, tactic_ids: &[usize]) -> Result<String> {
    if tactic_ids.is_empty() {
        return Err(Error::invalid("tactic set is empty"));
    }
    if headline.trim().is_empty() {
        return Err(Error::EmptyInput("headline is empty"));
    }
    let mut ids = tactic_ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if let Some(bad) = ids.iter().find(|&&i| i >= TACTIC_COUNT) {
        return Err(Error::invalid(format!("tactic id {bad} out of range")));
    }
    Ok(ids
        .iter()
        .fold(headline.trim().to_string(), |acc, &id| TEMPLATES[id].apply(&acc)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_placeholder_each() {
        for (i, t) in TEMPLATES.iter().enumerate() {
            assert_eq!(t.tactic_id, i);
            assert_eq!(t.pattern.matches("{h}").count(), 1);
        }
    }

    #[test]
    fn worked_examples() {
        assert_eq!(
            apply_rule_transform("markets rally today.", &[0]).unwrap(),
            "what is behind markets rally today?"
        );
        assert_eq!(
            apply_rule_transform("markets rally today.", &[0, 1]).unwrap(),
            "you won't believe what is behind markets rally today?"
        );
        assert_eq!(
            apply_rule_transform("budget vote delayed", &[9]).unwrap(),
            "could budget vote delayed destroy everything?"
        );
        // order of the input set is irrelevant
        assert_eq!(
            apply_rule_transform("markets rally today.", &[1, 0]).unwrap(),
            apply_rule_transform("markets rally today.", &[0, 1]).unwrap()
        );
    }

    #[test]
    fn rejects_empty_set() {
        assert!(apply_rule_transform("x", &[]).is_err());
        assert!(apply_rule_transform("x", &[10]).is_err());
    }
}
