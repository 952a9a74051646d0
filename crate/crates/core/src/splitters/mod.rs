//! Sentence splitting and unit splitters.
//!
//! Every unit splitter produces a [`BoundarySet`]: the token indices after
//! which a unit ends, excluding the sentence-final token. A sentence with
//! `k` internal boundaries has `k + 1` units.

mod clinical;
mod rules;
mod sentences;

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::corpus::{TextSpan, Unit, UnitKind};
use crate::error::{Error, Result};
use crate::tokenize::{LexiconHooks, Token, TokenTag};

pub use clinical::{split_clinical_rules, Rule, RuleConfig, RulePatterns};
pub use rules::{
    split_clauses, split_fullstop, split_fullstop_verb, split_fullstop_with, DEFAULT_FULLSTOP_MARKS,
};
pub use sentences::{split_sentences, Sentence};

/// Internal split positions of one sentence, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundarySet {
    pub sentence_index: usize,
    #[serde(rename = "boundaries")]
    positions: Vec<usize>,
}

impl BoundarySet {
    pub fn empty(sentence_index: usize) -> Self {
        BoundarySet {
            sentence_index,
            positions: Vec::new(),
        }
    }

    /// Validate `positions` against a sentence of `token_count` tokens.
    pub fn new(sentence_index: usize, positions: Vec<usize>, token_count: usize) -> Result<Self> {
        let set = BoundarySet {
            sentence_index,
            positions,
        };
        if !set.is_valid_for(token_count) {
            return Err(Error::Validation(format!(
                "boundaries {:?} invalid for sentence {} with {} tokens",
                set.positions, sentence_index, token_count
            )));
        }
        Ok(set)
    }

    /// Sort, deduplicate and drop anything that is not an internal position.
    pub fn from_candidates<I>(sentence_index: usize, candidates: I, token_count: usize) -> Self
    where
        I: IntoIterator<Item = usize>,
    {
        let mut positions: Vec<usize> = candidates
            .into_iter()
            .filter(|&b| b + 1 < token_count)
            .collect();
        positions.sort_unstable();
        positions.dedup();
        BoundarySet {
            sentence_index,
            positions,
        }
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn unit_count(&self) -> usize {
        self.positions.len() + 1
    }

    pub fn contains(&self, position: usize) -> bool {
        self.positions.binary_search(&position).is_ok()
    }

    pub fn is_valid_for(&self, token_count: usize) -> bool {
        self.positions.windows(2).all(|w| w[0] < w[1])
            && self.positions.last().is_none_or(|&b| b + 1 < token_count)
    }

    /// Token ranges of the units, covering `0..token_count`.
    pub fn token_ranges(&self, token_count: usize) -> Vec<Range<usize>> {
        let mut ranges = Vec::with_capacity(self.positions.len() + 1);
        let mut start = 0;
        for &b in &self.positions {
            ranges.push(start..b + 1);
            start = b + 1;
        }
        if token_count > 0 {
            ranges.push(start..token_count);
        }
        ranges
    }

    /// `self` with every position of `other` added.
    pub fn union(&self, other: &BoundarySet) -> BoundarySet {
        let mut positions = self.positions.clone();
        positions.extend_from_slice(&other.positions);
        positions.sort_unstable();
        positions.dedup();
        BoundarySet {
            sentence_index: self.sentence_index,
            positions,
        }
    }
}

/// Turn a boundary set into units that tile the sentence.
///
/// Unit character spans snap to token starts: whitespace after a unit's last
/// token belongs to that unit, and the last unit runs to `sentence_len`.
pub fn materialize_units(
    tokens: &[Token],
    sentence_len: usize,
    boundaries: &BoundarySet,
    kind: UnitKind,
) -> Vec<Unit> {
    let ranges = boundaries.token_ranges(tokens.len());
    let starts: Vec<usize> = ranges
        .iter()
        .enumerate()
        .map(|(j, r)| if j == 0 { 0 } else { tokens[r.start].span.start })
        .collect();
    ranges
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let end = starts.get(j + 1).copied().unwrap_or(sentence_len);
            Unit {
                sentence_index: boundaries.sentence_index,
                unit_index: j,
                kind,
                span: TextSpan::new(starts[j], end),
                tokens: r.clone(),
                text_len: tokens[r.end - 1].span.end - tokens[r.start].span.start,
            }
        })
        .collect()
}

/// A punctuation token right after `b` takes over a predicate boundary at `b`.
pub(crate) fn attaches_left(tokens: &[Token], b: usize) -> bool {
    tokens
        .get(b + 1)
        .is_some_and(|t| matches!(t.tag, TokenTag::Comma | TokenTag::FullStop))
}

/// A rule-based splitting method with its configuration.
#[derive(Debug, Clone)]
pub enum RuleSplitter {
    FullStop { marks: Vec<String> },
    FullStopVerb { marks: Vec<String>, hooks: LexiconHooks },
    Clause { hooks: LexiconHooks },
    Clinical(RuleConfig),
}

impl RuleSplitter {
    pub fn split(&self, sentence_index: usize, tokens: &[Token]) -> BoundarySet {
        match self {
            RuleSplitter::FullStop { marks } => split_fullstop_with(sentence_index, tokens, marks),
            RuleSplitter::FullStopVerb { marks, hooks } => {
                rules::split_fullstop_verb_with(sentence_index, tokens, hooks, marks)
            }
            RuleSplitter::Clause { hooks } => split_clauses(sentence_index, tokens, hooks),
            RuleSplitter::Clinical(config) => split_clinical_rules(sentence_index, tokens, config),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::units_tile;
    use crate::tokenize::tokenize;

    #[test]
    fn validation() {
        assert!(BoundarySet::new(0, vec![1, 3], 5).is_ok());
        assert!(BoundarySet::new(0, vec![3, 1], 5).is_err());
        assert!(BoundarySet::new(0, vec![1, 1], 5).is_err());
        assert!(BoundarySet::new(0, vec![4], 5).is_err());
        assert!(BoundarySet::new(0, vec![], 1).is_ok());
    }

    #[test]
    fn candidates_normalized() {
        let set = BoundarySet::from_candidates(2, [4, 1, 1, 9, 3], 5);
        assert_eq!(set.positions(), [1, 3]);
        assert_eq!(set.unit_count(), 3);
    }

    #[test]
    fn ranges_cover_tokens() {
        let set = BoundarySet::from_candidates(0, [0, 2], 5);
        assert_eq!(set.token_ranges(5), vec![0..1, 1..3, 3..5]);
    }

    #[test]
    fn units_tile_sentence() {
        let text = " ab cd , ef 。";
        let tokens = tokenize(text, &LexiconHooks::default());
        let set = BoundarySet::from_candidates(0, [2], tokens.len());
        let units = materialize_units(&tokens, text.chars().count(), &set, UnitKind::Segment);
        assert_eq!(units.len(), 2);
        assert!(units_tile(&units, text.chars().count()));
        assert_eq!(units[0].span.slice(text), " ab cd , ");
        assert_eq!(units[0].text_len, "ab cd ,".len());
        assert_eq!(units[1].span.slice(text), "ef 。");
    }
}
