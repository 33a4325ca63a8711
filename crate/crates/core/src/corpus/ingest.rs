use std::collections::HashSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use super::{tokenize, HeadlineRecord};
use crate::error::{Error, Result};

/// Reads neutral headlines from a CSV with a `title` column (the
/// `title,text,subject,date` layout). Rows whose title does not tokenize are
/// skipped; repeated titles (same token sequence) keep the first occurrence.
pub fn ingest_neutral_corpus(path: &Path, limit: Option<usize>) -> Result<Vec<HeadlineRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_neutral_reader(file, limit)
}

pub fn ingest_neutral_reader<R: Read>(reader: R, limit: Option<usize>) -> Result<Vec<HeadlineRecord>> {
    let mut csv = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let title_col = csv
        .headers()?
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case("title"))
        .ok_or(Error::MissingColumn("title"))?;

    let mut seen: HashSet<Vec<String>> = HashSet::new();
    let mut out = Vec::new();
    for row in csv.records() {
        if limit.is_some_and(|n| out.len() >= n) {
            break;
        }
        let row = row?;
        let Some(title) = row.get(title_col) else { continue };
        let title = title.trim();
        let Ok(tokens) = tokenize(title) else { continue };
        if !seen.insert(tokens.clone()) {
            continue;
        }
        let source_id = format!("src-{:06}", out.len());
        out.push(HeadlineRecord::neutral(source_id, title.to_string(), tokens));
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("no usable rows in corpus"));
    }
    Ok(out)
}
