//! Heuristic clinical-segment rule engine.
//!
//! R1 proposes boundaries at predicate ends (commas, verbs, verbal nouns).
//! R2 adds parenthesis boundaries around an enclosed segment, R3 and R4 force
//! boundaries after disease-name and exam-result chunks. R5 and R6 then
//! remove boundaries: R5 inside runs of units with no medical marker, R6
//! inside negated enumerations and around temporal or plan connectives.
//! The R6 patterns come from a versioned JSON pattern file.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{attaches_left, BoundarySet};
use crate::error::{Error, Result};
use crate::tokenize::{LexiconHooks, MarkerKind, SurfaceSet, Token, TokenTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
}

impl Rule {
    pub const ALL: [Rule; 6] = [Rule::R1, Rule::R2, Rule::R3, Rule::R4, Rule::R5, Rule::R6];
}

pub const PATTERN_FILE_VERSION: u32 = 1;

/// Contents of the rule pattern file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RulePatterns {
    pub version: u32,
    pub fullstop_marks: Vec<String>,
    pub comma_marks: Vec<String>,
    /// Particles that close a disease-name or exam-result chunk.
    pub chunk_particles: SurfaceSet,
    /// Predicates that negate a preceding enumeration of findings.
    pub negation_words: SurfaceSet,
    /// Temporal and plan connectives that never start or end a segment.
    pub connective_words: SurfaceSet,
    /// Longest comma-separated item still counted as an enumeration item.
    pub enumeration_max_item_tokens: usize,
}

impl Default for RulePatterns {
    fn default() -> Self {
        RulePatterns {
            version: PATTERN_FILE_VERSION,
            fullstop_marks: vec!["。".into(), "．".into(), ".".into()],
            comma_marks: vec!["、".into(), "，".into(), ",".into()],
            chunk_particles: SurfaceSet::new(["で", "にて", "と"]),
            negation_words: SurfaceSet::new(["否定", "なし", "denied"]),
            connective_words: SurfaceSet::new(["後", "方針", "予定", "継続"]),
            enumeration_max_item_tokens: 3,
        }
    }
}

impl RulePatterns {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let patterns: RulePatterns = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        if patterns.version != PATTERN_FILE_VERSION {
            return Err(Error::Validation(format!(
                "pattern file version {} is not supported (expected {PATTERN_FILE_VERSION})",
                patterns.version
            )));
        }
        Ok(patterns)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleConfig {
    enabled: BTreeSet<Rule>,
    pub patterns: RulePatterns,
    pub hooks: LexiconHooks,
}

impl RuleConfig {
    /// R2 to R6 refine R1, so enabling any of them requires R1.
    pub fn new(
        enabled: impl IntoIterator<Item = Rule>,
        patterns: RulePatterns,
        hooks: LexiconHooks,
    ) -> Result<Self> {
        let enabled: BTreeSet<Rule> = enabled.into_iter().collect();
        if !enabled.is_empty() && !enabled.contains(&Rule::R1) {
            return Err(Error::Validation(
                "rules R2-R6 extend R1; enable R1 as well".into(),
            ));
        }
        Ok(RuleConfig {
            enabled,
            patterns,
            hooks,
        })
    }

    pub fn all(patterns: RulePatterns, hooks: LexiconHooks) -> Self {
        RuleConfig::new(Rule::ALL, patterns, hooks).expect("full rule set is valid")
    }

    pub fn is_enabled(&self, rule: Rule) -> bool {
        self.enabled.contains(&rule)
    }

    fn is_comma(&self, token: &Token) -> bool {
        token.tag == TokenTag::Comma && self.patterns.comma_marks.contains(&token.surface)
    }
}

pub fn split_clinical_rules(sentence_index: usize, tokens: &[Token], config: &RuleConfig) -> BoundarySet {
    let n = tokens.len();
    if !config.is_enabled(Rule::R1) || n < 2 {
        return BoundarySet::empty(sentence_index);
    }
    let hooks = &config.hooks;
    let patterns = &config.patterns;

    let mut found: BTreeSet<usize> = BTreeSet::new();
    for (i, token) in tokens.iter().enumerate() {
        if config.is_comma(token) {
            found.insert(i);
        } else if hooks.is_verbal_noun(token) {
            match tokens.get(i + 1) {
                Some(next) if hooks.is_particle(next) => {
                    if !attaches_left(tokens, i + 1) {
                        found.insert(i + 1);
                    }
                }
                _ if !attaches_left(tokens, i) => {
                    found.insert(i);
                }
                _ => {}
            }
        } else if hooks.is_verb(token) && !attaches_left(tokens, i) {
            found.insert(i);
        }
    }

    if config.is_enabled(Rule::R3) {
        for (d, token) in tokens.iter().enumerate() {
            if token.tag != TokenTag::Marker(MarkerKind::Disease) {
                continue;
            }
            if let Some(p) = (d + 1..n.min(d + 3)).find(|&p| patterns.chunk_particles.contains(&tokens[p].surface)) {
                if !attaches_left(tokens, p) {
                    found.insert(p);
                }
            }
        }
    }

    if config.is_enabled(Rule::R4) {
        for (e, token) in tokens.iter().enumerate() {
            if token.tag != TokenTag::Marker(MarkerKind::Exam) {
                continue;
            }
            let Some(num) = (e + 1..n.min(e + 5)).find(|&p| tokens[p].tag == TokenTag::Number) else {
                continue;
            };
            let close = (num + 1..n).find(|&p| {
                patterns.chunk_particles.contains(&tokens[p].surface) || config.is_comma(&tokens[p])
            });
            if let Some(p) = close {
                if !attaches_left(tokens, p) || config.is_comma(&tokens[p]) {
                    found.insert(p);
                }
            }
        }
    }

    if config.is_enabled(Rule::R2) {
        let mut stack = Vec::new();
        let mut paren_bounds = Vec::new();
        for (i, token) in tokens.iter().enumerate() {
            match token.tag {
                TokenTag::ParenOpen => stack.push(i),
                TokenTag::ParenClose => {
                    if let Some(open) = stack.pop() {
                        if found.range(open + 1..i).next().is_some() {
                            paren_bounds.push(open);
                            paren_bounds.push(i);
                        }
                    }
                }
                _ => {}
            }
        }
        found.extend(paren_bounds);
    }

    let mut set = BoundarySet::from_candidates(sentence_index, found, n);

    if config.is_enabled(Rule::R5) {
        set = suppress_non_medical(set, tokens);
    }
    if config.is_enabled(Rule::R6) {
        set = suppress_empty_meaning(set, tokens, patterns);
    }
    set
}

/// Drop boundaries between two adjacent units that both lack a marker.
fn suppress_non_medical(set: BoundarySet, tokens: &[Token]) -> BoundarySet {
    let ranges = set.token_ranges(tokens.len());
    let medical: Vec<bool> = ranges
        .iter()
        .map(|r| tokens[r.clone()].iter().any(|t| t.tag.is_marker()))
        .collect();
    let kept = set
        .positions()
        .iter()
        .enumerate()
        .filter(|&(k, _)| medical[k] || medical[k + 1])
        .map(|(_, &b)| b);
    BoundarySet::from_candidates(set.sentence_index, kept.collect::<Vec<_>>(), tokens.len())
}

fn suppress_empty_meaning(set: BoundarySet, tokens: &[Token], patterns: &RulePatterns) -> BoundarySet {
    let mut blocked: BTreeSet<usize> = BTreeSet::new();

    // Negated enumeration: short comma-separated items ending in a negation.
    if let Some(neg) = tokens.iter().rposition(|t| !t.tag.is_punctuation()) {
        if patterns.negation_words.contains(&tokens[neg].surface) {
            let mut start = neg;
            let mut item_len = 0;
            let mut i = neg;
            while i > 0 {
                i -= 1;
                if tokens[i].tag == TokenTag::Comma {
                    item_len = 0;
                    continue;
                }
                item_len += 1;
                if item_len > patterns.enumeration_max_item_tokens {
                    break;
                }
                start = i;
            }
            blocked.extend(start..neg);
        }
    }

    // Connectives glue to both neighbours.
    for (i, token) in tokens.iter().enumerate() {
        if patterns.connective_words.contains(&token.surface) {
            blocked.insert(i);
            if i > 0 {
                blocked.insert(i - 1);
            }
            if tokens.get(i + 1).is_some_and(|t| t.tag == TokenTag::Comma) {
                blocked.insert(i + 1);
            }
        }
    }

    let kept: Vec<usize> = set
        .positions()
        .iter()
        .copied()
        .filter(|b| !blocked.contains(b))
        .collect();
    BoundarySet::from_candidates(set.sentence_index, kept, tokens.len())
}
