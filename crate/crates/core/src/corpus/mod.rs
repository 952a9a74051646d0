//! Cases, spans and units, plus JSON-lines corpus ingestion.
//!
//! A corpus file holds one case per line:
//! `{"id": "...", "records": ["...", ...], "summary": "..."}`.
//! Records are kept as raw lines; sentence splitting happens downstream so
//! offsets always refer to the original text.

mod synthetic;

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use synthetic::{
    generate_synthetic, generate_synthetic_with_gold, synthetic_lexicon, ChunkOrigin,
    GoldBoundaries, SummaryChunk, SyntheticCorpus, SyntheticSpec,
};

/// One patient episode: inpatient record lines and the reference discharge summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case {
    pub id: String,
    #[serde(rename = "records")]
    pub record_sentences: Vec<String>,
    #[serde(rename = "summary")]
    pub summary_text: String,
}

impl Case {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Validation("case id is empty".into()));
        }
        if self.record_sentences.is_empty() {
            return Err(Error::Validation(format!(
                "case `{}` has no record lines",
                self.id
            )));
        }
        if self.summary_text.is_empty() {
            return Err(Error::Validation(format!(
                "case `{}` has an empty summary",
                self.id
            )));
        }
        Ok(())
    }
}

/// Half-open character interval `[start, end)` into one sentence's text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TextSpan {
    pub start: usize,
    pub end: usize,
}

impl TextSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end, "span start {start} after end {end}");
        TextSpan { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, other: &TextSpan) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn intersects(&self, other: &TextSpan) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Slice `text` by character offsets.
    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        let mut indices = text.char_indices().map(|(i, _)| i).chain(Some(text.len()));
        let start = indices.nth(self.start).unwrap_or(text.len());
        let end = if self.end == self.start {
            start
        } else {
            indices.nth(self.end - self.start - 1).unwrap_or(text.len())
        };
        &text[start..end]
    }
}

/// Granularity of an extraction unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitKind {
    Sentence,
    Segment,
    Clause,
}

impl UnitKind {
    pub const ALL: [UnitKind; 3] = [UnitKind::Sentence, UnitKind::Segment, UnitKind::Clause];

    pub fn as_str(&self) -> &'static str {
        match self {
            UnitKind::Sentence => "sentence",
            UnitKind::Segment => "segment",
            UnitKind::Clause => "clause",
        }
    }
}

impl std::fmt::Display for UnitKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for UnitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sentence" => Ok(UnitKind::Sentence),
            "segment" => Ok(UnitKind::Segment),
            "clause" => Ok(UnitKind::Clause),
            other => Err(Error::Validation(format!("unknown unit kind `{other}`"))),
        }
    }
}

/// An extraction unit: a contiguous piece of sentence `sentence_index`.
///
/// `tokens` is the half-open token range the unit covers; `span` is the
/// character span, which extends to the start of the next unit so units of
/// one sentence tile it exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unit {
    pub sentence_index: usize,
    pub unit_index: usize,
    pub kind: UnitKind,
    pub span: TextSpan,
    pub tokens: std::ops::Range<usize>,
    /// Characters from the first token start to the last token end.
    pub text_len: usize,
}

/// Check that units (already filtered to one sentence and one kind) tile a
/// sentence of `sentence_len` characters.
pub fn units_tile(units: &[Unit], sentence_len: usize) -> bool {
    if units.is_empty() {
        return sentence_len == 0;
    }
    let mut cursor = 0;
    for (j, unit) in units.iter().enumerate() {
        if unit.unit_index != j || unit.span.start != cursor || unit.span.is_empty() {
            return false;
        }
        cursor = unit.span.end;
    }
    cursor == sentence_len
}

/// Parse a JSON-lines corpus. Blank lines are skipped.
pub fn parse_corpus(text: &str) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let case: Case = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        case.validate().map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if !seen.insert(case.id.clone()) {
            return Err(Error::Validation(format!(
                "duplicate case id `{}` at line {line_no}",
                case.id
            )));
        }
        cases.push(case);
    }
    Ok(cases)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Case>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text)
}

pub fn serialize_corpus(cases: &[Case]) -> String {
    let mut out = String::new();
    for case in cases {
        out.push_str(&serde_json::to_string(case).expect("case serializes"));
        out.push('\n');
    }
    out
}

pub fn save_corpus(path: impl AsRef<Path>, cases: &[Case]) -> Result<()> {
    write_text(path, &serialize_corpus(cases))
}

/// Read one JSON value per non-blank line.
pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("value serializes"));
        out.push('\n');
    }
    out
}

pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, items: &[T]) -> Result<()> {
    write_text(path, &to_jsonl(items))
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case(id: &str) -> Case {
        Case {
            id: id.into(),
            record_sentences: vec!["a b 。".into(), "c d".into()],
            summary_text: "a b 。".into(),
        }
    }

    #[test]
    fn two_lines_in_order() {
        let text = serialize_corpus(&[case("x"), case("y")]);
        let cases = parse_corpus(&text).unwrap();
        assert_eq!(cases.len(), 2);
        assert_eq!(cases[0].id, "x");
        assert_eq!(cases[1].id, "y");
    }

    #[test]
    fn missing_summary_names_line() {
        let text = format!(
            "{}\n{{\"id\":\"b\",\"records\":[\"r\"]}}\n",
            serde_json::to_string(&case("a")).unwrap()
        );
        match parse_corpus(&text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("summary"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        assert!(parse_corpus("").unwrap().is_empty());
    }

    #[test]
    fn duplicate_id_rejected() {
        let text = serialize_corpus(&[case("a"), case("a")]);
        assert!(matches!(parse_corpus(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn empty_records_rejected() {
        let line = r#"{"id":"a","records":[],"summary":"s"}"#;
        assert!(matches!(parse_corpus(line), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn offsets_preserved() {
        let raw = Case {
            id: "w".into(),
            record_sentences: vec!["  spaced\tline 。 ".into()],
            summary_text: "x".into(),
        };
        let back = parse_corpus(&serialize_corpus(std::slice::from_ref(&raw))).unwrap();
        assert_eq!(back[0], raw);
    }

    #[test]
    fn span_slice_by_chars() {
        let text = "肺炎 疑い。";
        assert_eq!(TextSpan::new(0, 2).slice(text), "肺炎");
        assert_eq!(TextSpan::new(3, 6).slice(text), "疑い。");
        assert_eq!(TextSpan::new(6, 6).slice(text), "");
    }
}
