//! Line-delimited JSON persistence for records and prefix examples.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};

use super::HeadlineRecord;
use crate::error::{Error, Result};
use crate::rubric::{tactic_id, AttributeVector};

pub fn write_jsonl<T: Serialize>(items: &[T], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads one JSON object per line; blank lines are skipped and errors carry
/// the 1-based line number.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(item);
    }
    Ok(out)
}

pub fn write_dataset(records: &[HeadlineRecord], path: &Path) -> Result<()> {
    write_jsonl(records, path)
}

pub fn read_dataset(path: &Path) -> Result<Vec<HeadlineRecord>> {
    read_jsonl(path)
}

/// Accepts either the canonical 10-int array or a list of tactic names.
pub(crate) fn attributes_from_json<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<AttributeVector, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Flags(Vec<u8>),
        Names(Vec<String>),
    }
    match Repr::deserialize(d)? {
        Repr::Flags(v) => AttributeVector::try_from(v).map_err(serde::de::Error::custom),
        Repr::Names(names) => {
            let ids = names
                .iter()
                .map(|n| tactic_id(n))
                .collect::<Result<Vec<_>>>()
                .map_err(serde::de::Error::custom)?;
            AttributeVector::from_ids(ids).map_err(serde::de::Error::custom)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{expand_prefixes, PrefixExample, Split};

    fn neutral() -> HeadlineRecord {
        let mut r = HeadlineRecord::neutral(
            "src-000001".into(),
            "Markets rally today.".into(),
            vec!["markets".into(), "rally".into(), "today".into(), ".".into()],
        );
        r.split = Some(Split::Test);
        r
    }

    #[test]
    fn round_trip_one_record() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        write_dataset(&[neutral()], &path).unwrap();
        assert_eq!(read_dataset(&path).unwrap(), vec![neutral()]);
        let line = std::fs::read_to_string(&path).unwrap();
        assert!(line.contains("\"clickbait\":0"));
        assert!(line.contains("\"split\":\"test\""));
    }

    #[test]
    fn round_trip_prefixes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        let ex = expand_prefixes(&neutral()).unwrap();
        write_jsonl(&ex, &path).unwrap();
        let back: Vec<PrefixExample> = read_jsonl(&path).unwrap();
        assert_eq!(back, ex);
        assert!(std::fs::read_to_string(&path).unwrap().contains("\"T\":3"));
    }

    #[test]
    fn empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.jsonl");
        write_dataset(&[], &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "");
        assert!(read_dataset(&path).unwrap().is_empty());
    }

    #[test]
    fn missing_field_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        let good = serde_json::to_string(&neutral()).unwrap();
        let bad = good.replace("\"clickbait\":0,", "");
        std::fs::write(&path, format!("{good}\n{bad}\n")).unwrap();
        match read_dataset(&path).unwrap_err() {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("clickbait"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tactic_names_accepted_and_checked() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("names.jsonl");
        let base = serde_json::to_string(&neutral()).unwrap();
        let named = base.replace("[0,0,0,0,0,0,0,0,0,0]", "[\"emotional_framing\"]");
        std::fs::write(&path, format!("{named}\n")).unwrap();
        let recs = read_dataset(&path).unwrap();
        assert!(recs[0].attributes.get(2));

        let unknown = base.replace("[0,0,0,0,0,0,0,0,0,0]", "[\"clickiness\"]");
        std::fs::write(&path, format!("{unknown}\n")).unwrap();
        match read_dataset(&path).unwrap_err() {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 1);
                assert!(message.contains("clickiness"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
