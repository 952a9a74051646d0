//! Boundary scoring, the segment/clause relation census and granularity
//! statistics.

use std::fmt::Write as _;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::corpus::UnitKind;
use crate::document::Document;
use crate::splitters::BoundarySet;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    /// Standard P/R/F1 from counts; nothing predicted and nothing gold is a
    /// perfect score.
    pub fn from_counts(true_positive: usize, predicted: usize, gold: usize) -> Self {
        if predicted == 0 && gold == 0 {
            return Prf {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0,
            };
        }
        let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        let (p, r) = (ratio(true_positive, predicted), ratio(true_positive, gold));
        let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        Prf {
            precision: p,
            recall: r,
            f1,
        }
    }
}

fn true_positives(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut tp) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                tp += 1;
                i += 1;
                j += 1;
            }
        }
    }
    tp
}

pub fn boundary_prf(predicted: &BoundarySet, gold: &BoundarySet) -> Prf {
    let tp = true_positives(predicted.positions(), gold.positions());
    Prf::from_counts(tp, predicted.len(), gold.len())
}

/// Corpus-level boundary scores: micro over boundary instances and macro
/// over sentences.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundaryTally {
    pub true_positive: usize,
    pub predicted: usize,
    pub gold: usize,
    pub sentences: usize,
    f1_sum: f64,
    precision_sum: f64,
    recall_sum: f64,
}

impl BoundaryTally {
    pub fn add(&mut self, predicted: &BoundarySet, gold: &BoundarySet) {
        let tp = true_positives(predicted.positions(), gold.positions());
        self.true_positive += tp;
        self.predicted += predicted.len();
        self.gold += gold.len();
        self.sentences += 1;
        let s = Prf::from_counts(tp, predicted.len(), gold.len());
        self.precision_sum += s.precision;
        self.recall_sum += s.recall;
        self.f1_sum += s.f1;
    }

    pub fn micro(&self) -> Prf {
        Prf::from_counts(self.true_positive, self.predicted, self.gold)
    }

    pub fn macro_avg(&self) -> Prf {
        if self.sentences == 0 {
            return Prf::default();
        }
        let n = self.sentences as f64;
        Prf {
            precision: self.precision_sum / n,
            recall: self.recall_sum / n,
            f1: self.f1_sum / n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RelationType {
    Equal,
    Inclusive,
    Included,
    Overlap,
}

impl RelationType {
    pub const ALL: [RelationType; 4] = [
        RelationType::Equal,
        RelationType::Inclusive,
        RelationType::Included,
        RelationType::Overlap,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RelationType::Equal => "Equal",
            RelationType::Inclusive => "Inclusive",
            RelationType::Included => "Included",
            RelationType::Overlap => "Overlap",
        }
    }
}

/// Relation of a segment to a clause (token intervals of one sentence);
/// `None` when they do not intersect.
pub fn classify_relation(segment: &Range<usize>, clause: &Range<usize>) -> Option<RelationType> {
    if segment.start >= clause.end || clause.start >= segment.end {
        return None;
    }
    let seg_covers = segment.start <= clause.start && clause.end <= segment.end;
    let clause_covers = clause.start <= segment.start && segment.end <= clause.end;
    Some(match (seg_covers, clause_covers) {
        (true, true) => RelationType::Equal,
        (true, false) => RelationType::Inclusive,
        (false, true) => RelationType::Included,
        (false, false) => RelationType::Overlap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RelationCensus {
    pub equal: usize,
    pub inclusive: usize,
    pub included: usize,
    pub overlap: usize,
    /// Non-intersecting pairs, kept for diagnostics only.
    pub disjoint: usize,
}

impl RelationCensus {
    pub fn count(&self, r: RelationType) -> usize {
        match r {
            RelationType::Equal => self.equal,
            RelationType::Inclusive => self.inclusive,
            RelationType::Included => self.included,
            RelationType::Overlap => self.overlap,
        }
    }

    fn bump(&mut self, r: Option<RelationType>) {
        match r {
            Some(RelationType::Equal) => self.equal += 1,
            Some(RelationType::Inclusive) => self.inclusive += 1,
            Some(RelationType::Included) => self.included += 1,
            Some(RelationType::Overlap) => self.overlap += 1,
            None => self.disjoint += 1,
        }
    }

    /// Intersecting pairs.
    pub fn total(&self) -> usize {
        self.equal + self.inclusive + self.included + self.overlap
    }

    pub fn percentage(&self, r: RelationType) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            100.0 * self.count(r) as f64 / total as f64
        }
    }

    /// Add every (segment, clause) pair of one sentence.
    pub fn add_sentence(&mut self, segments: &BoundarySet, clauses: &BoundarySet, token_count: usize) {
        let clause_ranges = clauses.token_ranges(token_count);
        for seg in segments.token_ranges(token_count) {
            for clause in &clause_ranges {
                self.bump(classify_relation(&seg, clause));
            }
        }
    }

    pub fn to_tsv(&self, include_disjoint: bool) -> String {
        let mut out = String::from("relation\tcount\tpercent\n");
        for r in RelationType::ALL {
            let _ = writeln!(out, "{}\t{}\t{:.1}", r.as_str(), self.count(r), self.percentage(r));
        }
        let _ = writeln!(out, "Total\t{}\t100.0", self.total());
        if include_disjoint {
            let _ = writeln!(out, "Disjoint\t{}\t", self.disjoint);
        }
        out
    }
}

/// Census over documents given per-document segment and clause boundaries.
pub fn relation_census(
    documents: &[Document],
    segments: &[Vec<BoundarySet>],
    clauses: &[Vec<BoundarySet>],
) -> RelationCensus {
    let mut census = RelationCensus::default();
    for ((doc, seg), cla) in documents.iter().zip(segments).zip(clauses) {
        for ((s, a), b) in doc.sentences.iter().zip(seg).zip(cla) {
            census.add_sentence(a, b, s.tokens.len());
        }
    }
    census
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GranularityStats {
    pub kind: UnitKind,
    pub sentences: usize,
    pub units: usize,
    pub units_per_sentence: f64,
    pub mean_boundaries: f64,
    pub tokens_per_unit: f64,
    pub chars_per_unit: f64,
}

/// Means over all sentences and units. Unit character length is the
/// token extent (first token start to last token end).
pub fn granularity_stats(documents: &[Document], boundaries: &[Vec<BoundarySet>], kind: UnitKind) -> GranularityStats {
    let (mut sentences, mut units, mut internal, mut tokens, mut chars) = (0usize, 0usize, 0usize, 0usize, 0usize);
    for (doc, bs) in documents.iter().zip(boundaries) {
        sentences += doc.sentences.len();
        for u in doc.units(bs, kind) {
            units += 1;
            tokens += u.tokens.len();
            chars += u.text_len;
        }
        internal += bs.iter().map(BoundarySet::len).sum::<usize>();
    }
    let mean = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
    GranularityStats {
        kind,
        sentences,
        units,
        units_per_sentence: mean(units, sentences),
        mean_boundaries: mean(internal, sentences),
        tokens_per_unit: mean(tokens, units),
        chars_per_unit: mean(chars, units),
    }
}

pub fn granularity_tsv(rows: &[GranularityStats]) -> String {
    let mut out = String::from("unit\tunits_per_sentence\ttokens_per_unit\tchars_per_unit\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{:.2}\t{:.2}\t{:.2}",
            r.kind, r.units_per_sentence, r.tokens_per_unit, r.chars_per_unit
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Case;
    use crate::tokenize::LexiconHooks;
    use proptest::prelude::*;

    fn bs(p: &[usize], n: usize) -> BoundarySet {
        BoundarySet::new(0, p.to_vec(), n).unwrap()
    }

    #[test]
    fn prf_examples() {
        let s = boundary_prf(&bs(&[2, 5], 9), &bs(&[2, 7], 9));
        assert_eq!((s.precision, s.recall, s.f1), (0.5, 0.5, 0.5));
        let same = boundary_prf(&bs(&[1, 3], 9), &bs(&[1, 3], 9));
        assert_eq!(same.f1, 1.0);
        let miss = boundary_prf(&bs(&[], 9), &bs(&[1], 9));
        assert_eq!((miss.precision, miss.recall, miss.f1), (0.0, 0.0, 0.0));
        let none = boundary_prf(&bs(&[], 9), &bs(&[], 9));
        assert_eq!(none.f1, 1.0);
    }

    #[test]
    fn relation_examples() {
        assert_eq!(classify_relation(&(0..5), &(0..5)), Some(RelationType::Equal));
        assert_eq!(classify_relation(&(0..10), &(2..6)), Some(RelationType::Inclusive));
        assert_eq!(classify_relation(&(2..6), &(0..10)), Some(RelationType::Included));
        assert_eq!(classify_relation(&(0..5), &(3..8)), Some(RelationType::Overlap));
        assert_eq!(classify_relation(&(0..3), &(3..8)), None);
    }

    #[test]
    fn refinement_gives_inclusive() {
        // Clauses split segment [0,4) once more; [4,8) is shared.
        let mut c = RelationCensus::default();
        c.add_sentence(&bs(&[3], 8), &bs(&[1, 3], 8), 8);
        assert_eq!((c.equal, c.inclusive, c.included, c.overlap), (1, 2, 0, 0));
        let mut c = RelationCensus::default();
        c.add_sentence(&bs(&[3], 8), &bs(&[5], 8), 8);
        assert_eq!((c.equal, c.inclusive, c.included, c.overlap), (0, 1, 1, 1));
    }

    #[test]
    fn sentence_stats_one_unit_each() {
        let case = Case {
            id: "c".into(),
            record_sentences: vec!["a b , c 。 d e".into()],
            summary_text: "x".into(),
        };
        let doc = Document::from_case(&case, &LexiconHooks::default());
        let empty = vec![doc.sentences.iter().map(|s| BoundarySet::empty(s.index)).collect::<Vec<_>>()];
        let st = granularity_stats(std::slice::from_ref(&doc), &empty, UnitKind::Sentence);
        assert_eq!(st.units_per_sentence, 1.0);
        let one = vec![vec![bs(&[1], 5), BoundarySet::new(1, vec![0], 2).unwrap()]];
        let st = granularity_stats(std::slice::from_ref(&doc), &one, UnitKind::Segment);
        assert_eq!(st.units_per_sentence, 2.0);
        assert!(st.chars_per_unit < 6.0);
    }

    fn sorted_set(n: usize) -> impl Strategy<Value = Vec<usize>> {
        proptest::collection::btree_set(0..n.saturating_sub(1).max(1), 0..n)
            .prop_map(move |s| s.into_iter().filter(|&b| b + 1 < n).collect())
    }

    proptest! {
        #[test]
        fn prf_matches_confusion_matrix((n, a, b) in (2usize..20).prop_flat_map(|n| (Just(n), sorted_set(n), sorted_set(n)))) {
            let pa = bs(&a, n);
            let pb = bs(&b, n);
            let tp = (0..n).filter(|i| a.contains(i) && b.contains(i)).count();
            let fp = (0..n).filter(|i| a.contains(i) && !b.contains(i)).count();
            let fnn = (0..n).filter(|i| !a.contains(i) && b.contains(i)).count();
            let expected = Prf::from_counts(tp, tp + fp, tp + fnn);
            prop_assert_eq!(boundary_prf(&pa, &pb), expected);
        }

        #[test]
        fn relation_antisymmetric(a in 0usize..10, b in 1usize..10, c in 0usize..10, d in 1usize..10) {
            let s = a..a + b;
            let t = c..c + d;
            let flip = |r: Option<RelationType>| r.map(|r| match r {
                RelationType::Inclusive => RelationType::Included,
                RelationType::Included => RelationType::Inclusive,
                x => x,
            });
            prop_assert_eq!(classify_relation(&t, &s), flip(classify_relation(&s, &t)));
        }

        #[test]
        fn census_partitions_pairs((n, a, b) in (1usize..25).prop_flat_map(|n| (Just(n), sorted_set(n), sorted_set(n)))) {
            let sa = bs(&a, n);
            let sb = bs(&b, n);
            let mut c = RelationCensus::default();
            c.add_sentence(&sa, &sb, n);
            let mut intersecting = 0;
            for x in sa.token_ranges(n) {
                for y in sb.token_ranges(n) {
                    if x.start < y.end && y.start < x.end {
                        intersecting += 1;
                    }
                }
            }
            prop_assert_eq!(c.total(), intersecting);
            prop_assert_eq!(c.total() + c.disjoint, sa.unit_count() * sb.unit_count());
            if a == b {
                prop_assert_eq!(c.equal, c.total());
            }
        }
    }
}
