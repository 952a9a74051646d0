//! End-to-end experiment: split, label, train, summarize, score.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{granularity_stats, granularity_tsv, relation_census, BoundaryTally, GranularityStats, Prf, RelationCensus};
use crate::corpus::{generate_synthetic_with_gold, load_corpus, read_jsonl, write_text, Case, GoldBoundaries, SyntheticSpec, UnitKind};
use crate::document::Document;
use crate::error::{Error, Result};
use crate::oracle::{make_oracle_labels, BudgetRule};
use crate::rouge::{rouge_tokens, score_summary, RougeMode, SummaryScores};
use crate::segmenter::{segmenter_train, PointerSegmenter, SegmenterConfig};
use crate::splitters::{split_clauses, split_fullstop, BoundarySet, RulePatterns, RuleConfig, RuleSplitter};
use crate::summarizer::{summarizer_train, PreparedCase, Selection, Summarizer, SummarizerConfig};
use crate::tokenize::LexiconHooks;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CorpusSource {
    Synthetic { spec: SyntheticSpec },
    File { path: PathBuf, gold: Option<PathBuf> },
}

/// Splitter used to produce SEGMENT units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentMethod {
    #[default]
    Pointer,
    Gold,
    Fullstop,
    FullstopVerb,
    Clause,
    Clinical,
}

impl std::str::FromStr for SegmentMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Validation(format!("unknown segmentation method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitRatios {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.8,
            dev: 0.1,
            test: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub corpus: CorpusSource,
    pub hooks_path: Option<PathBuf>,
    pub rule_patterns_path: Option<PathBuf>,
    pub kinds: Vec<UnitKind>,
    pub segment_method: SegmentMethod,
    /// `None` uses the mean reference length of the training split.
    pub budget_chars: Option<usize>,
    pub budget_rule: BudgetRule,
    pub rouge_mode: RougeMode,
    pub splits: SplitRatios,
    /// Cap on gold sentences used to train the pointer segmenter.
    pub segmenter_max_sentences: usize,
    pub segmenter: SegmenterConfig,
    pub summarizer: SummarizerConfig,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: CorpusSource::Synthetic {
                spec: SyntheticSpec::default(),
            },
            hooks_path: None,
            rule_patterns_path: None,
            kinds: UnitKind::ALL.to_vec(),
            segment_method: SegmentMethod::Pointer,
            budget_chars: None,
            budget_rule: BudgetRule::KeepCrossing,
            rouge_mode: RougeMode::Token,
            splits: SplitRatios::default(),
            segmenter_max_sentences: 4000,
            segmenter: SegmenterConfig::default(),
            summarizer: SummarizerConfig::default(),
            seed: 1,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: PipelineConfig = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Replace every seed in the configuration.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.segmenter.seed = seed;
        self.summarizer.seed = seed;
        if let CorpusSource::Synthetic { spec } = &mut self.corpus {
            spec.seed = seed;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.splits;
        if [r.train, r.dev, r.test].iter().any(|x| !(0.0..=1.0).contains(x))
            || (r.train + r.dev + r.test - 1.0).abs() > 1e-9
        {
            return Err(Error::Validation(format!(
                "split ratios {}/{}/{} must lie in [0, 1] and sum to 1",
                r.train, r.dev, r.test
            )));
        }
        if self.kinds.is_empty() {
            return Err(Error::Validation("at least one unit kind is required".into()));
        }
        let mut kinds = self.kinds.clone();
        kinds.sort();
        kinds.dedup();
        if kinds.len() != self.kinds.len() {
            return Err(Error::Validation("unit kinds must not repeat".into()));
        }
        for p in [&self.hooks_path, &self.rule_patterns_path].into_iter().flatten() {
            if !p.exists() {
                return Err(Error::Validation(format!("referenced file {} does not exist", p.display())));
            }
        }
        if let CorpusSource::File { path, gold } = &self.corpus {
            for p in std::iter::once(path).chain(gold) {
                if !p.exists() {
                    return Err(Error::Validation(format!("referenced file {} does not exist", p.display())));
                }
            }
        }
        self.segmenter.validate()?;
        self.summarizer.validate()
    }
}

/// Cases with their documents, lexicon and optional gold boundaries.
#[derive(Debug, Clone)]
pub struct LoadedCorpus {
    pub cases: Vec<Case>,
    pub documents: Vec<Document>,
    pub hooks: LexiconHooks,
    /// Per document, one gold set per sentence.
    pub gold: Option<Vec<Vec<BoundarySet>>>,
}

impl LoadedCorpus {
    pub fn new(cases: Vec<Case>, hooks: LexiconHooks, gold: Option<&[GoldBoundaries]>) -> Result<Self> {
        let documents: Vec<Document> = cases.iter().map(|c| Document::from_case(c, &hooks)).collect();
        let gold = gold.map(|g| align_gold(&documents, g)).transpose()?;
        Ok(LoadedCorpus {
            cases,
            documents,
            hooks,
            gold,
        })
    }

    pub fn load(config: &PipelineConfig) -> Result<Self> {
        let custom_hooks = config.hooks_path.as_ref().map(LexiconHooks::load).transpose()?;
        match &config.corpus {
            CorpusSource::Synthetic { spec } => {
                let syn = generate_synthetic_with_gold(spec)?;
                LoadedCorpus::new(syn.cases, custom_hooks.unwrap_or(syn.lexicon), Some(&syn.gold))
            }
            CorpusSource::File { path, gold } => {
                let cases = load_corpus(path)?;
                let gold: Option<Vec<GoldBoundaries>> = gold.as_ref().map(read_jsonl).transpose()?;
                LoadedCorpus::new(cases, custom_hooks.unwrap_or_default(), gold.as_deref())
            }
        }
    }
}

/// Arrange gold records by document and sentence. Sentences without a
/// record have no boundaries.
pub fn align_gold(documents: &[Document], gold: &[GoldBoundaries]) -> Result<Vec<Vec<BoundarySet>>> {
    let mut by_key: HashMap<(&str, usize), &GoldBoundaries> = HashMap::new();
    for g in gold {
        by_key.insert((g.id.as_str(), g.sentence_index), g);
    }
    documents
        .iter()
        .map(|doc| {
            doc.sentences
                .iter()
                .map(|s| match by_key.get(&(doc.case_id.as_str(), s.index)) {
                    Some(g) => BoundarySet::new(s.index, g.boundaries.clone(), s.tokens.len())
                        .map_err(|e| e.in_stage("gold", Some(&doc.case_id))),
                    None => Ok(BoundarySet::empty(s.index)),
                })
                .collect()
        })
        .collect()
}

/// Document indices of the train, dev and test partitions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub train: Vec<usize>,
    pub dev: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn partition(n: usize, ratios: SplitRatios, seed: u64) -> Result<Partition> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = (n as f64 * ratios.test).round() as usize;
    let dev = (n as f64 * ratios.dev).round() as usize;
    if test == 0 || test + dev >= n {
        return Err(Error::Validation(format!(
            "{n} cases cannot be split into non-empty train and test sets with ratios {ratios:?}"
        )));
    }
    let sorted = |r: &[usize]| {
        let mut v = r.to_vec();
        v.sort_unstable();
        v
    };
    Ok(Partition {
        test: sorted(&order[..test]),
        dev: sorted(&order[test..test + dev]),
        train: sorted(&order[test + dev..]),
    })
}

/// Split `n` documents into train and dev, with `round(n * dev_fraction)`
/// dev documents (at least one when `dev_fraction > 0`).
pub fn holdout(n: usize, dev_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&dev_fraction) {
        return Err(Error::Validation(format!("dev fraction {dev_fraction} must lie in [0, 1)")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut dev = (n as f64 * dev_fraction).round() as usize;
    if dev_fraction > 0.0 {
        dev = dev.max(1);
    }
    if dev >= n {
        return Err(Error::Validation(format!("{n} cases leave no training data after holding out {dev}")));
    }
    let (mut d, mut t) = (order[..dev].to_vec(), order[dev..].to_vec());
    d.sort_unstable();
    t.sort_unstable();
    Ok((t, d))
}

/// Flatten per-document boundary sets into keyed records.
pub fn boundary_records(documents: &[Document], boundaries: &[Vec<BoundarySet>]) -> Vec<GoldBoundaries> {
    documents
        .iter()
        .zip(boundaries)
        .flat_map(|(doc, bs)| {
            bs.iter().map(|b| GoldBoundaries {
                id: doc.case_id.clone(),
                sentence_index: b.sentence_index,
                boundaries: b.positions().to_vec(),
            })
        })
        .collect()
}

/// Boundary sets for every document from a rule-based method.
pub fn rule_boundaries(documents: &[Document], splitter: &RuleSplitter) -> Vec<Vec<BoundarySet>> {
    documents
        .iter()
        .map(|d| d.split_with(|i, t| splitter.split(i, t)))
        .collect()
}

pub fn model_boundaries(documents: &[Document], model: &PointerSegmenter) -> Vec<Vec<BoundarySet>> {
    documents
        .iter()
        .map(|d| d.split_with(|i, t| model.predict(i, t)))
        .collect()
}

pub fn sentence_boundaries(documents: &[Document]) -> Vec<Vec<BoundarySet>> {
    documents
        .iter()
        .map(|d| d.sentences.iter().map(|s| BoundarySet::empty(s.index)).collect())
        .collect()
}

/// Gold-annotated training sentences from the given documents, in order.
pub fn segmenter_data(
    corpus: &LoadedCorpus,
    docs: &[usize],
    limit: usize,
) -> Result<Vec<(Vec<crate::tokenize::Token>, BoundarySet)>> {
    let gold = corpus
        .gold
        .as_ref()
        .ok_or_else(|| Error::Validation("pointer segmentation needs gold boundaries".into()))?;
    Ok(docs
        .iter()
        .flat_map(|&d| {
            corpus.documents[d]
                .sentences
                .iter()
                .zip(&gold[d])
                .map(|(s, g)| (s.tokens.clone(), g.clone()))
        })
        .take(limit)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationReport {
    pub method: SegmentMethod,
    pub test_sentences: usize,
    pub micro: Prf,
    pub macro_avg: Prf,
    pub fullstop_micro: Prf,
    pub fullstop_macro: Prf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindReport {
    pub kind: UnitKind,
    pub rouge: SummaryScores,
    pub oracle_rouge: SummaryScores,
    pub train_positive_rate: f64,
    pub epoch_losses: Vec<f64>,
    pub dev_rouge1: Vec<f64>,
    pub best_epoch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub dev: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: u32,
    pub seed: u64,
    pub budget_chars: usize,
    pub split_sizes: SplitSizes,
    pub segmentation: Option<SegmentationReport>,
    pub kinds: Vec<KindReport>,
    pub granularity: Vec<GranularityStats>,
    pub relations: Option<RelationCensus>,
}

impl ExperimentReport {
    pub fn kind(&self, kind: UnitKind) -> Option<&KindReport> {
        self.kinds.iter().find(|k| k.kind == kind)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let version = value.get("version").and_then(serde_json::Value::as_u64);
        if version != Some(REPORT_VERSION as u64) {
            return Err(Error::Validation(format!(
                "unsupported report version {version:?}; expected {REPORT_VERSION}"
            )));
        }
        serde_json::from_value(value).map_err(|e| Error::Parse {
            line: 0,
            message: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        ExperimentReport::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    /// Summarization scores, granularity and relations as TSV tables.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("unit\tROUGE-1\tROUGE-2\tROUGE-L\toracle ROUGE-1\n");
        for k in &self.kinds {
            let _ = writeln!(
                out,
                "{}\t{:.2}\t{:.2}\t{:.2}\t{:.2}",
                k.kind,
                100.0 * k.rouge.rouge1.f1,
                100.0 * k.rouge.rouge2.f1,
                100.0 * k.rouge.rouge_l.f1,
                100.0 * k.oracle_rouge.rouge1.f1
            );
        }
        out.push('\n');
        out.push_str(&granularity_tsv(&self.granularity));
        if let Some(r) = &self.relations {
            out.push('\n');
            out.push_str(&r.to_tsv(false));
        }
        if let Some(s) = &self.segmentation {
            out.push('\n');
            out.push_str("method\tprecision\trecall\tF1\n");
            for (name, p) in [("fullstop", s.fullstop_micro), (method_name(s.method), s.micro)] {
                let _ = writeln!(out, "{name}\t{:.3}\t{:.3}\t{:.3}", p.precision, p.recall, p.f1);
            }
        }
        out
    }
}

fn method_name(m: SegmentMethod) -> &'static str {
    match m {
        SegmentMethod::Pointer => "pointer",
        SegmentMethod::Gold => "gold",
        SegmentMethod::Fullstop => "fullstop",
        SegmentMethod::FullstopVerb => "fullstop-verb",
        SegmentMethod::Clause => "clause",
        SegmentMethod::Clinical => "clinical",
    }
}

/// Everything an experiment produces.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: ExperimentReport,
    /// `(file name, bytes)` for every trained model.
    pub checkpoints: Vec<(String, Vec<u8>)>,
}

impl ExperimentOutput {
    /// Write `report.json`, `report.tsv` and the checkpoints into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_text(dir.join("report.json"), &self.report.to_json())?;
        write_text(dir.join("report.tsv"), &self.report.to_tsv())?;
        for (name, bytes) in &self.checkpoints {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

fn rule_splitter(method: SegmentMethod, config: &PipelineConfig, hooks: &LexiconHooks) -> Result<RuleSplitter> {
    let marks = RulePatterns::default().fullstop_marks;
    Ok(match method {
        SegmentMethod::Fullstop => RuleSplitter::FullStop { marks },
        SegmentMethod::FullstopVerb => RuleSplitter::FullStopVerb {
            marks,
            hooks: hooks.clone(),
        },
        SegmentMethod::Clause => RuleSplitter::Clause { hooks: hooks.clone() },
        SegmentMethod::Clinical => {
            let patterns = match &config.rule_patterns_path {
                Some(p) => RulePatterns::load(p)?,
                None => RulePatterns::default(),
            };
            RuleSplitter::Clinical(RuleConfig::all(patterns, hooks.clone()))
        }
        SegmentMethod::Pointer | SegmentMethod::Gold => {
            unreachable!("learned and gold segmentation are not rule-based")
        }
    })
}

/// Per-document oracle labels and prepared cases for one unit kind.
pub fn prepare_cases(
    corpus: &LoadedCorpus,
    docs: &[usize],
    boundaries: &[Vec<BoundarySet>],
    budget: usize,
    rule: BudgetRule,
    config: &SummarizerConfig,
) -> Result<Vec<PreparedCase>> {
    docs.iter()
        .map(|&d| {
            let doc = &corpus.documents[d];
            let case = &corpus.cases[d];
            let units = doc.units(&boundaries[d], config.kind);
            let unit_tokens: Vec<Vec<String>> = units.iter().map(|u| doc.unit_rouge_tokens(u, config.rouge_mode)).collect();
            let summary_tokens = rouge_tokens(&case.summary_text, config.rouge_mode);
            let labels = make_oracle_labels(&units, &unit_tokens, &summary_tokens, budget, rule)
                .into_iter()
                .map(|l| l.gold)
                .collect();
            PreparedCase::new(doc, units, labels, &case.summary_text, config)
                .map_err(|e| e.in_stage("prepare", Some(&doc.case_id)))
        })
        .collect()
}

/// ROUGE of the oracle-labelled units themselves.
pub fn oracle_scores(cases: &[PreparedCase], mode: RougeMode) -> SummaryScores {
    let all: Vec<SummaryScores> = cases
        .iter()
        .map(|c| {
            let texts: Vec<&str> = c
                .unit_texts
                .iter()
                .zip(&c.labels)
                .filter(|(_, g)| **g)
                .map(|(t, _)| t.as_str())
                .collect();
            score_summary(&texts, &c.reference, mode)
        })
        .collect();
    SummaryScores::mean(&all)
}

pub fn run_experiment(config: &PipelineConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let corpus = LoadedCorpus::load(config).map_err(|e| e.in_stage("load", None))?;
    run_experiment_on(config, &corpus)
}

pub fn run_experiment_on(config: &PipelineConfig, corpus: &LoadedCorpus) -> Result<ExperimentOutput> {
    config.validate()?;
    let parts = partition(corpus.documents.len(), config.splits, config.seed).map_err(|e| e.in_stage("split", None))?;
    let docs = &corpus.documents;
    let mut checkpoints = Vec::new();

    let wants = |k: UnitKind| config.kinds.contains(&k);
    let need_segments = wants(UnitKind::Segment);
    let need_clauses = wants(UnitKind::Clause) || need_segments;

    let mut segmentation = None;
    let segments = if need_segments {
        Some(match config.segment_method {
            SegmentMethod::Gold => corpus
                .gold
                .clone()
                .ok_or_else(|| Error::Validation("gold segmentation requested without gold boundaries".into()).in_stage("segment", None))?,
            SegmentMethod::Pointer => {
                let data = segmenter_data(corpus, &parts.train, config.segmenter_max_sentences)
                    .map_err(|e| e.in_stage("train-segmenter", None))?;
                let (model, _) = segmenter_train(&data, config.segmenter.clone()).map_err(|e| e.in_stage("train-segmenter", None))?;
                checkpoints.push(("segmenter.ckpt".to_string(), model.to_checkpoint().to_bytes()));
                model_boundaries(docs, &model)
            }
            m => rule_boundaries(docs, &rule_splitter(m, config, &corpus.hooks)?),
        })
    } else {
        None
    };
    if let (Some(seg), Some(gold)) = (&segments, &corpus.gold) {
        let (mut tally, mut base) = (BoundaryTally::default(), BoundaryTally::default());
        for &d in &parts.test {
            for (s, (p, g)) in docs[d].sentences.iter().zip(seg[d].iter().zip(&gold[d])) {
                tally.add(p, g);
                base.add(&split_fullstop(s.index, &s.tokens), g);
            }
        }
        segmentation = Some(SegmentationReport {
            method: config.segment_method,
            test_sentences: tally.sentences,
            micro: tally.micro(),
            macro_avg: tally.macro_avg(),
            fullstop_micro: base.micro(),
            fullstop_macro: base.macro_avg(),
        });
    }
    let clauses = need_clauses.then(|| {
        docs.iter()
            .map(|d| d.split_with(|i, t| split_clauses(i, t, &corpus.hooks)))
            .collect::<Vec<_>>()
    });
    let sentences = sentence_boundaries(docs);

    let budget = match config.budget_chars {
        Some(b) => b,
        None => {
            let total: usize = parts.train.iter().map(|&d| corpus.cases[d].summary_text.chars().count()).sum();
            (total as f64 / parts.train.len() as f64).round() as usize
        }
    };

    let mut kinds = Vec::new();
    let mut granularity = Vec::new();
    for &kind in &config.kinds {
        let bounds = match kind {
            UnitKind::Sentence => &sentences,
            UnitKind::Segment => segments.as_ref().expect("segments computed"),
            UnitKind::Clause => clauses.as_ref().expect("clauses computed"),
        };
        granularity.push(granularity_stats(docs, bounds, kind));
        let sum_config = SummarizerConfig {
            kind,
            rouge_mode: config.rouge_mode,
            selection: Selection::Budget {
                chars: budget,
                rule: config.budget_rule,
            },
            ..config.summarizer.clone()
        };
        let prep = |ids: &[usize]| {
            prepare_cases(corpus, ids, bounds, budget, config.budget_rule, &sum_config).map_err(|e| e.in_stage("oracle", None))
        };
        let (train, dev, test) = (prep(&parts.train)?, prep(&parts.dev)?, prep(&parts.test)?);
        let (labels, positives) = train
            .iter()
            .flat_map(|c| &c.labels)
            .fold((0usize, 0usize), |(n, p), &g| (n + 1, p + g as usize));
        let stage = format!("train-summarizer:{kind}");
        let (model, log) = summarizer_train(&train, &dev, sum_config.clone()).map_err(|e| e.in_stage(&stage, None))?;
        checkpoints.push((format!("summarizer-{kind}.ckpt"), model.to_checkpoint().to_bytes()));
        kinds.push(KindReport {
            kind,
            rouge: model.evaluate(&test),
            oracle_rouge: oracle_scores(&test, config.rouge_mode),
            train_positive_rate: positives as f64 / labels.max(1) as f64,
            epoch_losses: log.epoch_losses,
            dev_rouge1: log.dev_scores.iter().map(|s| s.rouge1.f1).collect(),
            best_epoch: log.best_epoch,
        });
    }

    let relations = match (&segments, &clauses) {
        (Some(s), Some(c)) if wants(UnitKind::Clause) => Some(relation_census(docs, s, c)),
        _ => None,
    };

    Ok(ExperimentOutput {
        report: ExperimentReport {
            version: REPORT_VERSION,
            seed: config.seed,
            budget_chars: budget,
            split_sizes: SplitSizes {
                train: parts.train.len(),
                dev: parts.dev.len(),
                test: parts.test.len(),
            },
            segmentation,
            kinds,
            granularity,
            relations,
        },
        checkpoints,
    })
}

/// Load a summarizer from checkpoint bytes written by an experiment.
pub fn load_summarizer(path: impl AsRef<Path>) -> Result<Summarizer> {
    Summarizer::from_checkpoint(&crate::nn::Checkpoint::load(path)?)
}
