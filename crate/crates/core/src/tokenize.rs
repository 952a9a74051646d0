//! Deterministic tiling tokenizer, lexicon hooks and hashed character n-gram
//! features.
//!
//! The tokenizer splits on whitespace, punctuation classes and script
//! boundaries (Latin, hiragana, katakana, han). Whitespace is consumed;
//! every other character belongs to exactly one token, and token spans are
//! character offsets into the input.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::TextSpan;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkerKind {
    Disease,
    Exam,
    VerbalNoun,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenTag {
    Word,
    Number,
    Punct,
    FullStop,
    Comma,
    ParenOpen,
    ParenClose,
    Newline,
    Marker(MarkerKind),
}

impl TokenTag {
    /// Punctuation-like tags carry no lexical content for ROUGE.
    pub fn is_punctuation(&self) -> bool {
        matches!(
            self,
            TokenTag::Punct
                | TokenTag::FullStop
                | TokenTag::Comma
                | TokenTag::ParenOpen
                | TokenTag::ParenClose
                | TokenTag::Newline
        )
    }

    pub fn is_marker(&self) -> bool {
        matches!(self, TokenTag::Marker(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub span: TextSpan,
    pub surface: String,
    pub tag: TokenTag,
}

/// A set of exact surfaces plus `*`-wildcard patterns.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SurfaceSet {
    exact: HashSet<String>,
    patterns: Vec<String>,
}

impl SurfaceSet {
    pub fn new<I, S>(items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = SurfaceSet::default();
        for item in items {
            let item = item.into();
            if item.contains('*') {
                set.patterns.push(item);
            } else {
                set.exact.insert(item);
            }
        }
        set.patterns.sort();
        set
    }

    pub fn contains(&self, surface: &str) -> bool {
        self.exact.contains(surface) || self.patterns.iter().any(|p| wildcard_match(p, surface))
    }

    pub fn is_empty(&self) -> bool {
        self.exact.is_empty() && self.patterns.is_empty()
    }

    fn to_list(&self) -> Vec<String> {
        let mut out: Vec<String> = self.exact.iter().cloned().collect();
        out.sort();
        out.extend(self.patterns.iter().cloned());
        out
    }
}

impl Serialize for SurfaceSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_list().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SurfaceSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        Ok(SurfaceSet::new(Vec::<String>::deserialize(deserializer)?))
    }
}

/// Glob match where `*` matches any (possibly empty) character run.
fn wildcard_match(pattern: &str, text: &str) -> bool {
    let parts: Vec<&str> = pattern.split('*').collect();
    if parts.len() == 1 {
        return pattern == text;
    }
    let (first, last) = (parts[0], parts[parts.len() - 1]);
    if !text.starts_with(first) || text.len() < first.len() + last.len() || !text.ends_with(last) {
        return false;
    }
    let mut rest = &text[first.len()..text.len() - last.len()];
    for middle in &parts[1..parts.len() - 1] {
        match rest.find(middle) {
            Some(pos) => rest = &rest[pos + middle.len()..],
            None => return false,
        }
    }
    true
}

/// Named word lists that stand in for a morphological analyzer.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LexiconHooks {
    pub verb_list: SurfaceSet,
    pub noun_list: SurfaceSet,
    pub non_independent_list: SurfaceSet,
    pub verbal_noun_list: SurfaceSet,
    pub disease_list: SurfaceSet,
    pub exam_pattern_list: SurfaceSet,
    /// Case particles; a verbal noun followed by one of these closes a clause.
    pub particle_list: SurfaceSet,
}

impl LexiconHooks {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn is_verb(&self, token: &Token) -> bool {
        self.verb_list.contains(&token.surface)
    }

    pub fn is_non_independent(&self, token: &Token) -> bool {
        self.non_independent_list.contains(&token.surface)
    }

    /// Nouns include disease, exam and verbal-noun markers and non-independent nouns.
    pub fn is_noun(&self, token: &Token) -> bool {
        token.tag.is_marker()
            || self.noun_list.contains(&token.surface)
            || self.non_independent_list.contains(&token.surface)
    }

    pub fn is_verbal_noun(&self, token: &Token) -> bool {
        token.tag == TokenTag::Marker(MarkerKind::VerbalNoun)
            || self.verbal_noun_list.contains(&token.surface)
    }

    pub fn is_particle(&self, token: &Token) -> bool {
        self.particle_list.contains(&token.surface)
    }

    fn marker_for(&self, surface: &str) -> Option<MarkerKind> {
        if self.disease_list.contains(surface) {
            Some(MarkerKind::Disease)
        } else if self.exam_pattern_list.contains(surface) {
            Some(MarkerKind::Exam)
        } else if self.verbal_noun_list.contains(surface) {
            Some(MarkerKind::VerbalNoun)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CharClass {
    Space,
    Newline,
    FullStop,
    Comma,
    ParenOpen,
    ParenClose,
    Punct,
    Latin,
    Hiragana,
    Katakana,
    Han,
    OtherLetter,
}

fn classify(c: char) -> CharClass {
    match c {
        '\n' => CharClass::Newline,
        c if c.is_whitespace() => CharClass::Space,
        '。' | '．' | '.' => CharClass::FullStop,
        '、' | '，' | ',' => CharClass::Comma,
        '(' | '（' | '「' | '『' | '[' | '【' | '［' | '{' | '｛' => CharClass::ParenOpen,
        ')' | '）' | '」' | '』' | ']' | '】' | '］' | '}' | '｝' => CharClass::ParenClose,
        c if c.is_ascii_alphanumeric() => CharClass::Latin,
        '\u{FF10}'..='\u{FF19}' | '\u{FF21}'..='\u{FF3A}' | '\u{FF41}'..='\u{FF5A}' => {
            CharClass::Latin
        }
        '\u{3041}'..='\u{309F}' => CharClass::Hiragana,
        '\u{30A0}'..='\u{30FF}' | '\u{FF66}'..='\u{FF9F}' => CharClass::Katakana,
        '\u{4E00}'..='\u{9FFF}' | '\u{3400}'..='\u{4DBF}' | '\u{3005}' => CharClass::Han,
        c if c.is_alphabetic() => CharClass::OtherLetter,
        _ => CharClass::Punct,
    }
}

fn is_digit(c: char) -> bool {
    c.is_ascii_digit() || ('\u{FF10}'..='\u{FF19}').contains(&c)
}

/// Tokenize one sentence. Never fails; empty input yields no tokens.
pub fn tokenize(sentence_text: &str, hooks: &LexiconHooks) -> Vec<Token> {
    let chars: Vec<char> = sentence_text.chars().collect();
    let mut classes: Vec<CharClass> = chars.iter().map(|&c| classify(c)).collect();

    // Joiners inside Latin runs: 4.5, 1,000, weight-loss.
    for i in 1..chars.len().saturating_sub(1) {
        let (prev, next) = (chars[i - 1], chars[i + 1]);
        let joins = match chars[i] {
            '.' | ',' => is_digit(prev) && is_digit(next),
            '-' | '_' => classes[i - 1] == CharClass::Latin && classify(next) == CharClass::Latin,
            _ => false,
        };
        if joins {
            classes[i] = CharClass::Latin;
        }
    }

    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let class = classes[i];
        if class == CharClass::Space {
            i += 1;
            continue;
        }
        let start = i;
        let runs = matches!(
            class,
            CharClass::Latin
                | CharClass::Hiragana
                | CharClass::Katakana
                | CharClass::Han
                | CharClass::OtherLetter
        );
        i += 1;
        if runs {
            while i < chars.len() && classes[i] == class {
                i += 1;
            }
        }
        let surface: String = chars[start..i].iter().collect();
        let tag = match class {
            CharClass::Newline => TokenTag::Newline,
            CharClass::FullStop => TokenTag::FullStop,
            CharClass::Comma => TokenTag::Comma,
            CharClass::ParenOpen => TokenTag::ParenOpen,
            CharClass::ParenClose => TokenTag::ParenClose,
            CharClass::Punct => TokenTag::Punct,
            _ => match hooks.marker_for(&surface) {
                Some(kind) => TokenTag::Marker(kind),
                None if surface.chars().all(|c| is_digit(c) || c == '.' || c == ',') => {
                    TokenTag::Number
                }
                None => TokenTag::Word,
            },
        };
        tokens.push(Token {
            span: TextSpan::new(start, i),
            surface,
            tag,
        });
    }
    tokens
}

/// Hashes character n-grams of a `<`/`>`-padded surface into buckets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubwordHasher {
    pub n_min: usize,
    pub n_max: usize,
    pub bucket_count: usize,
    pub seed: u64,
}

impl Default for SubwordHasher {
    fn default() -> Self {
        SubwordHasher {
            n_min: 2,
            n_max: 4,
            bucket_count: 1 << 16,
            seed: 0,
        }
    }
}

impl SubwordHasher {
    pub fn new(n_min: usize, n_max: usize, bucket_count: usize, seed: u64) -> Result<Self> {
        let hasher = SubwordHasher {
            n_min,
            n_max,
            bucket_count,
            seed,
        };
        hasher.validate()?;
        Ok(hasher)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::Validation(format!(
                "n-gram range {}..{} is invalid",
                self.n_min, self.n_max
            )));
        }
        if self.bucket_count == 0 {
            return Err(Error::Validation("bucket_count must be positive".into()));
        }
        Ok(())
    }

    /// Bucket indices for every n-gram of the padded surface, in order.
    pub fn buckets(&self, surface: &str) -> Vec<usize> {
        let padded: Vec<char> = std::iter::once('<')
            .chain(surface.chars())
            .chain(std::iter::once('>'))
            .collect();
        let mut out = Vec::new();
        let mut buf = String::new();
        for n in self.n_min..=self.n_max {
            if n > padded.len() {
                break;
            }
            for window in padded.windows(n) {
                buf.clear();
                buf.extend(window.iter());
                out.push(self.bucket_of(&buf));
            }
        }
        if out.is_empty() {
            let whole: String = padded.iter().collect();
            out.push(self.bucket_of(&whole));
        }
        out
    }

    fn bucket_of(&self, gram: &str) -> usize {
        (mix64(fnv1a(self.seed, gram.as_bytes())) % self.bucket_count as u64) as usize
    }
}

pub fn embed_token_id(token: &Token, hasher: &SubwordHasher) -> Vec<usize> {
    hasher.buckets(&token.surface)
}

fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET ^ mix64(seed);
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(PRIME);
    }
    hash
}

// splitmix64 finalizer
fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}
