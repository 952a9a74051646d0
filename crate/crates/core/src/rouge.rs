//! ROUGE-N with clipped n-gram counts and union-LCS ROUGE-L.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::splitters::split_sentences;
use crate::tokenize::{tokenize, LexiconHooks};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    pub fn from_counts(matched: usize, candidate_total: usize, reference_total: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        Self::from_pr(ratio(matched, candidate_total), ratio(matched, reference_total))
    }

    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        RougeScore {
            precision,
            recall,
            f1,
        }
    }
}

fn ngram_counts<T: Eq + Hash>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// ROUGE-N with each n-gram's match count clipped to its reference count.
pub fn rouge_n<T: Eq + Hash>(candidate: &[T], reference: &[T], n: usize) -> RougeScore {
    assert!(n >= 1, "ROUGE-N needs n >= 1");
    let cand = ngram_counts(candidate, n);
    let refs = ngram_counts(reference, n);
    let matched: usize = refs
        .iter()
        .map(|(g, &rc)| cand.get(g).map_or(0, |&cc| cc.min(rc)))
        .sum();
    let total = |len: usize| (len + 1).saturating_sub(n);
    RougeScore::from_counts(matched, total(candidate.len()), total(reference.len()))
}

/// Positions of `reference` matched by one longest common subsequence with
/// `candidate`. Ties prefer the earliest reference positions.
pub fn lcs_matches<T: Eq>(reference: &[T], candidate: &[T]) -> Vec<usize> {
    let (n, m) = (reference.len(), candidate.len());
    // suffix[i][j] = LCS length of reference[i..] and candidate[j..]
    let mut suffix = vec![0usize; (n + 1) * (m + 1)];
    let at = |i: usize, j: usize| i * (m + 1) + j;
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            suffix[at(i, j)] = if reference[i] == candidate[j] {
                suffix[at(i + 1, j + 1)] + 1
            } else {
                suffix[at(i + 1, j)].max(suffix[at(i, j + 1)])
            };
        }
    }
    let (mut i, mut j) = (0, 0);
    let mut matched = Vec::with_capacity(suffix[0]);
    while i < n && j < m {
        if reference[i] == candidate[j] {
            matched.push(i);
            i += 1;
            j += 1;
        } else if suffix[at(i, j + 1)] >= suffix[at(i + 1, j)] {
            j += 1;
        } else {
            i += 1;
        }
    }
    matched
}

pub fn lcs_len<T: Eq>(a: &[T], b: &[T]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// Size of the union of LCS-matched reference positions over all candidate
/// sentences, and that size as a fraction of the reference length.
pub fn union_lcs<T: Eq, C: AsRef<[T]>>(reference: &[T], candidates: &[C]) -> (usize, f64) {
    let mut hit = vec![false; reference.len()];
    for c in candidates {
        for i in lcs_matches(reference, c.as_ref()) {
            hit[i] = true;
        }
    }
    let count = hit.iter().filter(|&&h| h).count();
    let ratio = if reference.is_empty() {
        0.0
    } else {
        count as f64 / reference.len() as f64
    };
    (count, ratio)
}

/// Summary-level ROUGE-L over candidate and reference sentences.
///
/// Union-LCS hits are summed over reference sentences. A hit only counts
/// while the candidate side still has an unused copy of that token, so one
/// candidate token cannot be credited to several reference sentences.
pub fn rouge_l<T: Eq + Hash, C: AsRef<[T]>, R: AsRef<[T]>>(candidates: &[C], references: &[R]) -> RougeScore {
    let mut remaining: HashMap<&T, usize> = HashMap::new();
    for c in candidates {
        for t in c.as_ref() {
            *remaining.entry(t).or_insert(0) += 1;
        }
    }
    let mut matched = 0;
    for r in references {
        let r = r.as_ref();
        let mut hit = vec![false; r.len()];
        for c in candidates {
            for i in lcs_matches(r, c.as_ref()) {
                hit[i] = true;
            }
        }
        for (i, _) in hit.iter().enumerate().filter(|(_, &h)| h) {
            if let Some(left) = remaining.get_mut(&r[i]).filter(|n| **n > 0) {
                *left -= 1;
                matched += 1;
            }
        }
    }
    let cand_total: usize = candidates.iter().map(|c| c.as_ref().len()).sum();
    let ref_total: usize = references.iter().map(|r| r.as_ref().len()).sum();
    RougeScore::from_counts(matched, cand_total, ref_total)
}

/// What ROUGE counts as one unit of text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RougeMode {
    #[default]
    Token,
    Char,
}

/// Non-punctuation tokens (or their characters) of `text`.
pub fn rouge_tokens(text: &str, mode: RougeMode) -> Vec<String> {
    let hooks = LexiconHooks::default();
    let words = tokenize(text, &hooks)
        .into_iter()
        .filter(|t| !t.tag.is_punctuation());
    match mode {
        RougeMode::Token => words.map(|t| t.surface).collect(),
        RougeMode::Char => words
            .flat_map(|t| t.surface.chars().map(String::from).collect::<Vec<_>>())
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SummaryScores {
    pub rouge1: RougeScore,
    pub rouge2: RougeScore,
    #[serde(rename = "rougeL")]
    pub rouge_l: RougeScore,
}

impl SummaryScores {
    pub fn mean(all: &[SummaryScores]) -> SummaryScores {
        if all.is_empty() {
            return SummaryScores::default();
        }
        let n = all.len() as f64;
        let avg = |f: fn(&SummaryScores) -> RougeScore| {
            let (p, r, f1) = all.iter().map(f).fold((0.0, 0.0, 0.0), |acc, s| {
                (acc.0 + s.precision, acc.1 + s.recall, acc.2 + s.f1)
            });
            RougeScore {
                precision: p / n,
                recall: r / n,
                f1: f1 / n,
            }
        };
        SummaryScores {
            rouge1: avg(|s| s.rouge1),
            rouge2: avg(|s| s.rouge2),
            rouge_l: avg(|s| s.rouge_l),
        }
    }
}

/// Score selected units (each one candidate sentence) against a reference
/// summary, which is split into sentences for ROUGE-L.
pub fn score_summary<S: AsRef<str>>(candidate_units: &[S], reference: &str, mode: RougeMode) -> SummaryScores {
    let cand_sents: Vec<Vec<String>> = candidate_units
        .iter()
        .map(|u| rouge_tokens(u.as_ref(), mode))
        .collect();
    let ref_sents: Vec<Vec<String>> = split_sentences(reference)
        .iter()
        .map(|s| rouge_tokens(&s.text, mode))
        .collect();
    let cand_flat: Vec<String> = cand_sents.iter().flatten().cloned().collect();
    let ref_flat: Vec<String> = ref_sents.iter().flatten().cloned().collect();
    SummaryScores {
        rouge1: rouge_n(&cand_flat, &ref_flat, 1),
        rouge2: rouge_n(&cand_flat, &ref_flat, 2),
        rouge_l: rouge_l(&cand_sents, &ref_sents),
    }
}
