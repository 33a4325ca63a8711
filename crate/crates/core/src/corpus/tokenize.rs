//! Word-level reference tokenizer.
//!
//! Lowercases, splits on whitespace and detaches the punctuation marks
//! `. , : ; ! ? " ( ) $ % —` as single-character tokens. Apostrophes and
//! hyphens stay inside words.
//!
//! The period is reserved as the completion marker, so three refinements
//! keep a standalone `.` token at the end of the text only:
//!
//! * a period between two alphanumerics is internal (`3.5`, `u.s`), and a
//!   word that already has an internal period keeps its trailing one
//!   (`u.s.`);
//! * a run of two or more periods becomes the single token `...`;
//! * a detached `.` followed by further tokens is a clause break and is
//!   emitted as `;`.

use crate::error::{Error, Result};

/// The completion marker.
pub const PERIOD: &str = ".";
pub const ELLIPSIS: &str = "...";

const DETACHED: &[char] = &[
    '.', ',', ':', ';', '!', '?', '"', '(', ')', '$', '%', '\u{2014}',
];

pub fn tokenize(text: &str) -> Result<Vec<String>> {
    let lowered = text.to_lowercase();
    let mut tokens = Vec::new();
    for chunk in lowered.split_whitespace() {
        split_chunk(chunk, &mut tokens);
    }
    if tokens.is_empty() {
        return Err(Error::EmptyInput("text has no tokens"));
    }
    let last = tokens.len() - 1;
    for tok in &mut tokens[..last] {
        if tok == PERIOD {
            *tok = ";".to_string();
        }
    }
    Ok(tokens)
}

fn split_chunk(chunk: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let abbreviation = has_internal_period(&chars);
    let mut word = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '.' {
            let run = chars[i..].iter().take_while(|&&x| x == '.').count();
            if run >= 2 {
                flush(&mut word, out);
                out.push(ELLIPSIS.to_string());
                i += run;
                continue;
            }
            let prev_alnum = i > 0 && chars[i - 1].is_alphanumeric();
            let next_alnum = chars.get(i + 1).is_some_and(|x| x.is_alphanumeric());
            let trailing = i + 1 == chars.len();
            if (prev_alnum && next_alnum) || (abbreviation && trailing && prev_alnum) {
                word.push(c);
            } else {
                flush(&mut word, out);
                out.push(PERIOD.to_string());
            }
        } else if DETACHED.contains(&c) {
            flush(&mut word, out);
            out.push(c.to_string());
        } else {
            word.push(c);
        }
        i += 1;
    }
    flush(&mut word, out);
}

fn has_internal_period(chars: &[char]) -> bool {
    chars.windows(3).any(|w| {
        w[1] == '.' && w[0].is_alphabetic() && w[2].is_alphabetic()
    })
}

fn flush(word: &mut String, out: &mut Vec<String>) {
    if !word.is_empty() {
        out.push(std::mem::take(word));
    }
}

/// Joins tokens back into display text, attaching punctuation to the
/// preceding word.
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    let mut open = false;
    for tok in tokens {
        let tok = tok.as_ref();
        let attach_left = matches!(tok, "." | "," | ":" | ";" | "!" | "?" | ")" | "%" | "...");
        if !out.is_empty() && !attach_left && !open {
            out.push(' ');
        }
        out.push_str(tok);
        open = matches!(tok, "(" | "$");
    }
    out
}
