//! Synthetic corpus generator.
//!
//! Records are sentences of pseudo-words built from planted segments. A
//! segment ends with a comma or a bare verbal noun; inside, it may carry a
//! verb or a `verbal-noun particle` pair (clause boundaries that are not
//! segment boundaries), and a medical segment carries one disease or exam
//! marker. Summaries are sequences of segment-sized chunks: each chunk is a
//! verbatim copy of a record segment with probability `copy_rate`, otherwise
//! either a paraphrase of a record segment (some words swapped for
//! summary-only words) or free noise. Gold segment boundaries are emitted as
//! a side channel.

use std::collections::HashSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Case;
use crate::error::{Error, Result};
use crate::splitters::split_sentences;
use crate::tokenize::{tokenize, LexiconHooks, SurfaceSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub case_count: usize,
    /// Inclusive range of record lines per case.
    pub sentences_per_record: (usize, usize),
    /// Relative weights for 1, 2, 3, ... segments per sentence.
    pub segments_per_sentence: Vec<f64>,
    pub copy_rate: f64,
    /// Inclusive range of chunks per summary.
    pub summary_chunks: (usize, usize),
    pub medical_segment_prob: f64,
    /// Probability that a copied chunk is drawn from medical segments only.
    pub medical_copy_bias: f64,
    /// Probability that a noise word is borrowed from the record vocabulary.
    pub noise_overlap: f64,
    /// Noise chunks never use record vocabulary (overrides `noise_overlap`
    /// and `paraphrase_rate`).
    pub disjoint_vocabularies: bool,
    /// Probability that a non-copied chunk paraphrases a record segment.
    pub paraphrase_rate: f64,
    /// Per-word probability that a paraphrase keeps the source word.
    pub paraphrase_keep: f64,
    /// Probability that a record segment or a paraphrase chunk carries one
    /// of a few shared two-word stock phrases.
    pub stock_phrase_prob: f64,
    pub internal_verb_prob: f64,
    pub internal_particle_prob: f64,
    pub drop_fullstop_prob: f64,
    pub inject_newline_prob: f64,
    pub vocabulary_seed: u64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            case_count: 100,
            sentences_per_record: (30, 50),
            segments_per_sentence: vec![0.3, 0.35, 0.25, 0.1],
            copy_rate: 0.25,
            summary_chunks: (22, 26),
            medical_segment_prob: 0.3,
            medical_copy_bias: 0.9,
            noise_overlap: 0.2,
            disjoint_vocabularies: false,
            paraphrase_rate: 1.0,
            paraphrase_keep: 0.5,
            stock_phrase_prob: 0.3,
            internal_verb_prob: 0.5,
            internal_particle_prob: 0.2,
            drop_fullstop_prob: 0.05,
            inject_newline_prob: 0.03,
            vocabulary_seed: 17,
            seed: 42,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("copy_rate", self.copy_rate),
            ("medical_segment_prob", self.medical_segment_prob),
            ("medical_copy_bias", self.medical_copy_bias),
            ("noise_overlap", self.noise_overlap),
            ("paraphrase_rate", self.paraphrase_rate),
            ("paraphrase_keep", self.paraphrase_keep),
            ("stock_phrase_prob", self.stock_phrase_prob),
            ("internal_verb_prob", self.internal_verb_prob),
            ("internal_particle_prob", self.internal_particle_prob),
            ("drop_fullstop_prob", self.drop_fullstop_prob),
            ("inject_newline_prob", self.inject_newline_prob),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Validation(format!("{name} = {p} is outside [0, 1]")));
            }
        }
        let (lo, hi) = self.sentences_per_record;
        if self.case_count == 0 || lo == 0 || lo > hi {
            return Err(Error::Validation("case and sentence counts must be positive".into()));
        }
        let (lo, hi) = self.summary_chunks;
        if lo == 0 || lo > hi {
            return Err(Error::Validation("summary chunk range must be positive".into()));
        }
        if self.segments_per_sentence.is_empty()
            || self.segments_per_sentence.iter().any(|w| *w < 0.0 || !w.is_finite())
            || self.segments_per_sentence.iter().sum::<f64>() <= 0.0
        {
            return Err(Error::Validation(
                "segments_per_sentence needs non-negative weights with a positive sum".into(),
            ));
        }
        Ok(())
    }
}

/// Gold boundaries of one sentence, keyed by case id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldBoundaries {
    pub id: String,
    pub sentence_index: usize,
    pub boundaries: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChunkOrigin {
    Copied,
    Paraphrase,
    Noise,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryChunk {
    pub text: String,
    pub origin: ChunkOrigin,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub cases: Vec<Case>,
    pub gold: Vec<GoldBoundaries>,
    pub chunks: Vec<Vec<SummaryChunk>>,
    pub lexicon: LexiconHooks,
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Vec<Case>> {
    Ok(generate_synthetic_with_gold(spec)?.cases)
}

struct Vocabulary {
    plain: Vec<String>,
    summary_only: Vec<String>,
    diseases: Vec<String>,
    exams: Vec<String>,
    verbal_nouns: Vec<String>,
    verbs: Vec<String>,
    particles: Vec<String>,
    non_independent: Vec<String>,
    stock_phrases: Vec<String>,
}

impl Vocabulary {
    fn new(seed: u64) -> Self {
        const ONSETS: &[&str] = &["b", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"];
        const VOWELS: &[&str] = &["a", "e", "i", "o", "u"];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen = HashSet::new();
        let mut draw = |count: usize, syllables: (usize, usize), rng: &mut ChaCha8Rng| {
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let n = rng.random_range(syllables.0..=syllables.1);
                let word: String = (0..n)
                    .map(|_| {
                        format!(
                            "{}{}",
                            ONSETS.choose(rng).unwrap(),
                            VOWELS.choose(rng).unwrap()
                        )
                    })
                    .collect();
                if seen.insert(word.clone()) {
                    out.push(word);
                }
            }
            out
        };
        let particles = draw(5, (1, 1), &mut rng);
        let non_independent = draw(5, (1, 1), &mut rng);
        let plain = draw(600, (2, 3), &mut rng);
        let summary_only = draw(400, (2, 3), &mut rng);
        let suffixed = |stems: Vec<String>, suffixes: &[&str]| -> Vec<String> {
            stems
                .into_iter()
                .enumerate()
                .map(|(i, stem)| format!("{stem}{}", suffixes[i % suffixes.len()]))
                .collect()
        };
        let diseases = suffixed(draw(40, (2, 3), &mut rng), &["itis", "osis", "oma", "algia"]);
        let exams = suffixed(draw(20, (1, 2), &mut rng), &["gram", "scan"]);
        let verbal_nouns = draw(30, (3, 3), &mut rng);
        let verbs = draw(30, (2, 3), &mut rng);
        let stock_words = draw(16, (2, 2), &mut rng);
        let stock_phrases = stock_words.chunks(2).map(|w| w.join(" ")).collect();
        Vocabulary {
            plain,
            summary_only,
            diseases,
            exams,
            verbal_nouns,
            verbs,
            particles,
            non_independent,
            stock_phrases,
        }
    }

    fn lexicon(&self) -> LexiconHooks {
        LexiconHooks {
            verb_list: SurfaceSet::new(self.verbs.iter().cloned()),
            noun_list: SurfaceSet::new(self.plain.iter().step_by(2).cloned()),
            non_independent_list: SurfaceSet::new(self.non_independent.iter().cloned()),
            verbal_noun_list: SurfaceSet::new(self.verbal_nouns.iter().cloned()),
            disease_list: SurfaceSet::new(self.diseases.iter().cloned()),
            exam_pattern_list: SurfaceSet::new(self.exams.iter().cloned()),
            particle_list: SurfaceSet::new(self.particles.iter().cloned()),
        }
    }
}

/// The lexicon matching the planted vocabulary of `vocabulary_seed`.
pub fn synthetic_lexicon(vocabulary_seed: u64) -> LexiconHooks {
    Vocabulary::new(vocabulary_seed).lexicon()
}

struct PlantedSegment {
    tokens: Vec<String>,
    medical: bool,
}

fn pick<'a>(rng: &mut ChaCha8Rng, words: &'a [String]) -> &'a String {
    words.choose(rng).expect("non-empty vocabulary")
}

fn build_segment(
    rng: &mut ChaCha8Rng,
    vocab: &Vocabulary,
    spec: &SyntheticSpec,
    last: bool,
) -> PlantedSegment {
    let medical = rng.random_bool(spec.medical_segment_prob);
    let content_len = rng.random_range(2..=4);
    let mut body: Vec<Vec<String>> = (0..content_len)
        .map(|_| {
            if rng.random_bool(0.05) {
                vec![pick(rng, &vocab.non_independent).clone()]
            } else {
                vec![pick(rng, &vocab.plain).clone()]
            }
        })
        .collect();
    if medical {
        let marker = if rng.random_bool(0.6) {
            vec![pick(rng, &vocab.diseases).clone()]
        } else {
            vec![
                pick(rng, &vocab.exams).clone(),
                rng.random_range(1..10_000).to_string(),
            ]
        };
        let at = rng.random_range(0..=body.len());
        body.insert(at, marker);
    }
    if rng.random_bool(spec.stock_phrase_prob) {
        let at = rng.random_range(0..=body.len());
        body.insert(at, pick(rng, &vocab.stock_phrases).split(' ').map(str::to_string).collect());
    }
    // Internal predicates sit strictly before the last body item so a content
    // word always follows them.
    if rng.random_bool(spec.internal_verb_prob) {
        let at = rng.random_range(1..body.len());
        body.insert(at, vec![pick(rng, &vocab.verbs).clone()]);
    }
    if rng.random_bool(spec.internal_particle_prob) {
        let at = rng.random_range(1..body.len());
        body.insert(
            at,
            vec![
                pick(rng, &vocab.verbal_nouns).clone(),
                pick(rng, &vocab.particles).clone(),
            ],
        );
    }
    let mut tokens: Vec<String> = body.into_iter().flatten().collect();
    if last {
        if rng.random_bool(0.5) {
            tokens.push(pick(rng, &vocab.verbs).clone());
        } else {
            tokens.push(pick(rng, &vocab.verbal_nouns).clone());
        }
    } else if rng.random_bool(0.55) {
        tokens.push(",".into());
    } else {
        tokens.push(pick(rng, &vocab.verbal_nouns).clone());
    }
    PlantedSegment { tokens, medical }
}

/// Replace source words with summary-only words, keeping each with
/// probability `keep`. Punctuation stays; at least one word changes.
fn paraphrase(rng: &mut ChaCha8Rng, source: &str, vocab: &Vocabulary, keep: f64) -> String {
    let mut words: Vec<String> = source.split(' ').map(str::to_string).collect();
    let replaceable: Vec<usize> = (0..words.len())
        .filter(|&i| !matches!(words[i].as_str(), "," | "。"))
        .collect();
    let mut changed = false;
    for &i in &replaceable {
        if !rng.random_bool(keep) {
            words[i] = pick(rng, &vocab.summary_only).clone();
            changed = true;
        }
    }
    if !changed {
        if let Some(&i) = replaceable.choose(rng) {
            words[i] = pick(rng, &vocab.summary_only).clone();
        }
    }
    words.join(" ")
}

fn sample_weighted(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    weights.len() - 1
}

/// Generate cases together with planted gold boundaries and summary chunks.
pub fn generate_synthetic_with_gold(spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let vocab = Vocabulary::new(spec.vocabulary_seed);
    let lexicon = vocab.lexicon();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let width = spec.case_count.to_string().len();

    let mut cases = Vec::with_capacity(spec.case_count);
    let mut gold = Vec::new();
    let mut all_chunks = Vec::with_capacity(spec.case_count);

    for case_no in 0..spec.case_count {
        let id = format!("syn-{case_no:0width$}");
        let line_count = rng.random_range(spec.sentences_per_record.0..=spec.sentences_per_record.1);
        let mut lines = Vec::with_capacity(line_count);
        let mut segment_texts: Vec<(String, bool)> = Vec::new();
        let mut sentence_index = 0;

        for _ in 0..line_count {
            let k = sample_weighted(&mut rng, &spec.segments_per_sentence) + 1;
            let segments: Vec<PlantedSegment> = (0..k)
                .map(|j| build_segment(&mut rng, &vocab, spec, j + 1 == k))
                .collect();
            let keep_fullstop = !rng.random_bool(spec.drop_fullstop_prob);

            let mut line = String::new();
            // Token counts per sentence piece, and segment ends within each.
            let mut pieces: Vec<(usize, Vec<usize>)> = vec![(0, Vec::new())];
            for (j, seg) in segments.iter().enumerate() {
                let last = j + 1 == k;
                let mut tokens = seg.tokens.clone();
                if last && keep_fullstop {
                    tokens.push("。".into());
                }
                if j > 0 {
                    if rng.random_bool(spec.inject_newline_prob) {
                        line.push('\n');
                        pieces.push((0, Vec::new()));
                    } else {
                        line.push(' ');
                    }
                }
                let text = tokens.join(" ");
                line.push_str(&text);
                segment_texts.push((text, seg.medical));
                let piece = pieces.last_mut().unwrap();
                piece.0 += tokens.len();
                if !last {
                    piece.1.push(piece.0 - 1);
                }
            }

            let sentences = split_sentences(&line);
            if sentences.len() != pieces.len() {
                return Err(Error::Validation(format!(
                    "generator produced {} sentences for {} planted pieces in `{line}`",
                    sentences.len(),
                    pieces.len()
                )));
            }
            for (sentence, (token_count, ends)) in sentences.iter().zip(pieces) {
                let tokens = tokenize(&sentence.text, &lexicon);
                if tokens.len() != token_count {
                    return Err(Error::Validation(format!(
                        "planted {token_count} tokens but tokenizer found {} in `{}`",
                        tokens.len(),
                        sentence.text
                    )));
                }
                // A segment that closes a newline piece is not internal.
                let boundaries: Vec<usize> =
                    ends.into_iter().filter(|&b| b + 1 < token_count).collect();
                gold.push(GoldBoundaries {
                    id: id.clone(),
                    sentence_index,
                    boundaries,
                });
                sentence_index += 1;
            }
            lines.push(line);
        }

        let chunk_count = rng.random_range(spec.summary_chunks.0..=spec.summary_chunks.1);
        let mut medical_pool: Vec<usize> = (0..segment_texts.len()).filter(|&i| segment_texts[i].1).collect();
        let mut any_pool: Vec<usize> = (0..segment_texts.len()).collect();
        medical_pool.shuffle(&mut rng);
        any_pool.shuffle(&mut rng);
        let mut used = HashSet::new();
        // Each record segment feeds at most one chunk until the record runs out.
        let mut take_source = |rng: &mut ChaCha8Rng| -> Option<usize> {
            let from_medical = rng.random_bool(spec.medical_copy_bias);
            if from_medical {
                while let Some(i) = medical_pool.pop() {
                    if used.insert(i) {
                        return Some(i);
                    }
                }
            }
            while let Some(i) = any_pool.pop() {
                if used.insert(i) {
                    return Some(i);
                }
            }
            None
        };
        let mut chunks = Vec::with_capacity(chunk_count);
        for _ in 0..chunk_count {
            let copied = rng.random_bool(spec.copy_rate);
            let paraphrased = !copied && !spec.disjoint_vocabularies && rng.random_bool(spec.paraphrase_rate);
            let source = if copied || paraphrased { take_source(&mut rng) } else { None };
            let chunk = match source {
                Some(i) if copied => SummaryChunk {
                    text: segment_texts[i].0.clone(),
                    origin: ChunkOrigin::Copied,
                },
                Some(i) => {
                    let mut text = paraphrase(&mut rng, &segment_texts[i].0, &vocab, spec.paraphrase_keep);
                    if rng.random_bool(spec.stock_phrase_prob) {
                        text = format!("{} {text}", pick(&mut rng, &vocab.stock_phrases));
                    }
                    SummaryChunk {
                        text,
                        origin: ChunkOrigin::Paraphrase,
                    }
                }
                None => {
                    let len = rng.random_range(2..=5);
                    let words: Vec<String> = (0..len)
                        .map(|_| {
                            if !spec.disjoint_vocabularies && rng.random_bool(spec.noise_overlap) {
                                pick(&mut rng, &vocab.plain).clone()
                            } else {
                                pick(&mut rng, &vocab.summary_only).clone()
                            }
                        })
                        .collect();
                    SummaryChunk {
                        text: words.join(" "),
                        origin: ChunkOrigin::Noise,
                    }
                }
            };
            chunks.push(chunk);
        }

        let mut summary = String::new();
        let mut i = 0;
        while i < chunks.len() {
            let take = rng.random_range(1..=3).min(chunks.len() - i);
            if !summary.is_empty() {
                summary.push(' ');
            }
            let sentence: Vec<&str> = chunks[i..i + take].iter().map(|c| c.text.as_str()).collect();
            summary.push_str(&sentence.join(" "));
            if !summary.ends_with('。') {
                summary.push_str(" 。");
            }
            i += take;
        }

        cases.push(Case {
            id,
            record_sentences: lines,
            summary_text: summary,
        });
        all_chunks.push(chunks);
    }

    Ok(SyntheticCorpus {
        cases,
        gold,
        chunks: all_chunks,
        lexicon,
    })
}
