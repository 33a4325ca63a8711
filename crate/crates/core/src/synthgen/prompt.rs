use crate::error::{Error, Result};
use crate::rubric::TACTIC_COUNT;

/// Tactic names as they appear in generation prompts, with the instruction
/// that activates each one.
pub static PROMPT_TACTICS: [(&str, &str); TACTIC_COUNT] = [
    ("Curiosity Gap", "Hold back the key detail so the reader has to click to learn it."),
    (
        "Exaggeration",
        "Overstate the importance of the event well past what the story reports.",
    ),
    ("Emotional Trigger", "Push the reader toward worry or outrage that the facts do not justify."),
    (
        "Sensationalism",
        "Lead with the most dramatic detail, even a minor one, and drop the rest.",
    ),
    ("Lists or Superlatives", "Frame the story as a ranked list or as the biggest of its kind."),
    (
        "Ambiguous References",
        "Swap named people, places or things for vague words like \"this\" or \"they\".",
    ),
    ("Direct Appeals", "Speak to the reader as \"you\" and tell them to act."),
    ("Unfinished Narratives", "Stop before the outcome, as if the story continues elsewhere."),
    ("Unexpected Associations", "Tie the story to an odd, unrelated idea to surprise the reader."),
    ("Provocative Questions", "Turn the headline into a loaded question."),
];

/// Renders the attribute-control prompt for an LLM rewrite.
pub fn build_prompt(headline: &str, tactic_ids: &[usize]) -> Result<String> {
    let mut ids = tactic_ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if ids.is_empty() || ids.len() > 3 || ids.iter().any(|&i| i >= TACTIC_COUNT) {
        return Err(Error::invalid(format!("invalid tactic set {tactic_ids:?}")));
    }
    let mut p = String::new();
    if let [only] = ids[..] {
        let (name, instruction) = PROMPT_TACTICS[only];
        p.push_str(&format!("Rewrite the headline using the {name} tactic. {instruction}\n"));
    } else {
        p.push_str("Rewrite the headline using the following tactics:\n");
        for (n, &id) in ids.iter().enumerate() {
            let (name, instruction) = PROMPT_TACTICS[id];
            p.push_str(&format!("{}. {name}: {instruction}\n", n + 1));
        }
    }
    p.push_str(
        "Exaggerate only the selected dimensions and leave every other aspect of the headline as it is. \
         Preserve the original factual content and core meaning. Do not add new facts.\n\n",
    );
    p.push_str(&format!("Headline: {}\nRewritten headline:", headline.trim()));
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curiosity_gap_prompt() {
        let p = build_prompt("The White House budget chief expects delay in hitting debt limit", &[0]).unwrap();
        assert!(p.contains("Curiosity Gap"));
        assert!(p.contains("Do not add new facts"));
        assert!(p.contains("Hold back the key detail"));
    }

    #[test]
    fn exaggeration_prompt() {
        let p = build_prompt("Lawsuit says North Carolina bathroom law still harmful", &[1]).unwrap();
        assert!(p.contains("Exaggeration"));
        assert!(p.contains("Overstate the importance"));
    }

    #[test]
    fn three_tactics_named_once() {
        let p = build_prompt("h", &[2, 0, 1]).unwrap();
        for id in [0, 1, 2] {
            let name = PROMPT_TACTICS[id].0;
            assert_eq!(p.matches(name).count(), 1, "{name}");
        }
        for (name, _) in &PROMPT_TACTICS[3..] {
            assert!(!p.contains(name));
        }
    }

    #[test]
    fn deterministic_and_validated() {
        assert_eq!(build_prompt("h", &[4]).unwrap(), build_prompt("h", &[4]).unwrap());
        assert!(build_prompt("h", &[]).is_err());
        assert!(build_prompt("h", &[0, 1, 2, 3]).is_err());
    }
}
