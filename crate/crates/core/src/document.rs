//! A case turned into numbered, tokenized sentences.
//!
//! Each record line goes through the sentence splitter; sentences are then
//! numbered sequentially across the whole case, which is the index that
//! boundary sets and units refer to.

use crate::corpus::{Case, TextSpan, Unit, UnitKind};
use crate::rouge::{rouge_tokens, RougeMode};
use crate::splitters::{materialize_units, split_sentences, BoundarySet};
use crate::tokenize::{tokenize, LexiconHooks, Token};

#[derive(Debug, Clone, PartialEq)]
pub struct DocSentence {
    pub index: usize,
    pub text: String,
    pub tokens: Vec<Token>,
}

impl DocSentence {
    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub case_id: String,
    pub sentences: Vec<DocSentence>,
}

impl Document {
    pub fn from_case(case: &Case, hooks: &LexiconHooks) -> Self {
        let mut sentences = Vec::new();
        for line in &case.record_sentences {
            for s in split_sentences(line) {
                let tokens = tokenize(&s.text, hooks);
                sentences.push(DocSentence {
                    index: sentences.len(),
                    text: s.text,
                    tokens,
                });
            }
        }
        Document {
            case_id: case.id.clone(),
            sentences,
        }
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }

    /// Apply a splitter to every sentence.
    pub fn split_with<F>(&self, mut splitter: F) -> Vec<BoundarySet>
    where
        F: FnMut(usize, &[Token]) -> BoundarySet,
    {
        self.sentences
            .iter()
            .map(|s| splitter(s.index, &s.tokens))
            .collect()
    }

    /// Units of every sentence, in document order.
    pub fn units(&self, boundaries: &[BoundarySet], kind: UnitKind) -> Vec<Unit> {
        assert_eq!(boundaries.len(), self.sentences.len(), "one boundary set per sentence");
        self.sentences
            .iter()
            .zip(boundaries)
            .flat_map(|(s, b)| materialize_units(&s.tokens, s.char_len(), b, kind))
            .collect()
    }

    pub fn sentence_units(&self) -> Vec<Unit> {
        let empty: Vec<BoundarySet> = self.sentences.iter().map(|s| BoundarySet::empty(s.index)).collect();
        self.units(&empty, UnitKind::Sentence)
    }

    /// Text of a unit from its first token to its last, without the
    /// whitespace that follows it.
    pub fn unit_text(&self, unit: &Unit) -> &str {
        let s = &self.sentences[unit.sentence_index];
        let first = &s.tokens[unit.tokens.start];
        let last = &s.tokens[unit.tokens.end - 1];
        TextSpan::new(first.span.start, last.span.end).slice(&s.text)
    }

    pub fn unit_rouge_tokens(&self, unit: &Unit, mode: RougeMode) -> Vec<String> {
        rouge_tokens(self.unit_text(unit), mode)
    }
}
