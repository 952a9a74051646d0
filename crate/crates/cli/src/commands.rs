use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use segsum_core::analysis::{granularity_stats, granularity_tsv, relation_census, BoundaryTally};
use segsum_core::corpus::{
    generate_synthetic_with_gold, load_corpus, read_jsonl, save_corpus, write_jsonl, write_text,
};
use segsum_core::nn::Checkpoint;
use segsum_core::oracle::make_oracle_labels;
use segsum_core::pipeline::{
    align_gold, boundary_records, holdout, model_boundaries, prepare_cases, rule_boundaries,
    run_experiment, sentence_boundaries, LoadedCorpus,
};
use segsum_core::rouge::{rouge_tokens, score_summary, SummaryScores};
use segsum_core::segmenter::segmenter_train;
use segsum_core::splitters::{split_clauses, split_fullstop, RuleConfig, RulePatterns};
use segsum_core::summarizer::summarizer_train;
use segsum_core::{
    BoundarySet, GoldBoundaries, LexiconHooks, PipelineConfig, PointerSegmenter, RuleSplitter,
    SegmentMethod, SegmenterConfig, Selection, Summarizer, SummarizerConfig, SyntheticSpec,
    UnitKind,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{
    AnalyzeRelationsArgs, Cli, Command, CorpusArgs, EvalRougeArgs, EvalSegmenterArgs,
    GenSyntheticArgs, MakeOracleArgs, RunExperimentArgs, SegmentArgs, SplitSentencesArgs,
    StatsArgs, SummarizeArgs, TrainSegmenterArgs, TrainSummarizerArgs, UnitArgs,
};

/// A command line that parsed but cannot be acted on.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(message: impl Into<String>) -> Result<T> {
    Err(UsageError(message.into()).into())
}

pub fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::GenSynthetic(a) => gen_synthetic(a, seed),
        Command::SplitSentences(a) => split_sentences(a),
        Command::Segment(a) => segment(a),
        Command::TrainSegmenter(a) => train_segmenter(a, seed),
        Command::EvalSegmenter(a) => eval_segmenter(a),
        Command::MakeOracle(a) => make_oracle(a),
        Command::TrainSummarizer(a) => train_summarizer(a, seed),
        Command::Summarize(a) => summarize(a),
        Command::EvalRouge(a) => eval_rouge(a),
        Command::AnalyzeRelations(a) => analyze_relations(a),
        Command::Stats(a) => stats(a),
        Command::RunExperiment(a) => run_experiment_cmd(a, seed),
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| segsum_core::Error::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| segsum_core::Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
        .with_context(|| format!("reading {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(write_text(path, &text)?)
}

fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    match path {
        Some(p) => write_json(p, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value)?);
            Ok(())
        }
    }
}

fn load(args: &CorpusArgs) -> Result<LoadedCorpus> {
    let hooks = match &args.hooks {
        Some(p) => LexiconHooks::load(p).with_context(|| format!("loading hooks {}", p.display()))?,
        None => LexiconHooks::default(),
    };
    let cases = load_corpus(&args.input).with_context(|| format!("loading corpus {}", args.input.display()))?;
    Ok(LoadedCorpus::new(cases, hooks, None)?)
}

fn load_boundaries(corpus: &LoadedCorpus, path: &Path) -> Result<Vec<Vec<BoundarySet>>> {
    let records: Vec<GoldBoundaries> = read_jsonl(path).with_context(|| format!("reading boundaries {}", path.display()))?;
    Ok(align_gold(&corpus.documents, &records)?)
}

fn load_segmenter(path: &Path) -> Result<PointerSegmenter> {
    let ckpt = Checkpoint::load(path).with_context(|| format!("loading {}", path.display()))?;
    Ok(PointerSegmenter::from_checkpoint(&ckpt)?)
}

/// Boundaries that define the units of `kind`.
fn unit_boundaries(corpus: &LoadedCorpus, units: &UnitArgs) -> Result<Vec<Vec<BoundarySet>>> {
    match (units.kind, &units.boundaries) {
        (UnitKind::Sentence, _) => Ok(sentence_boundaries(&corpus.documents)),
        (_, Some(p)) => load_boundaries(corpus, p),
        (UnitKind::Clause, None) => Ok(clause_boundaries(corpus)),
        (UnitKind::Segment, None) => usage("--boundaries is required for segment units"),
    }
}

fn clause_boundaries(corpus: &LoadedCorpus) -> Vec<Vec<BoundarySet>> {
    corpus
        .documents
        .iter()
        .map(|d| d.split_with(|i, t| split_clauses(i, t, &corpus.hooks)))
        .collect()
}

fn gen_synthetic(a: GenSyntheticArgs, seed: Option<u64>) -> Result<()> {
    let mut spec: SyntheticSpec = match &a.config {
        Some(p) => read_json(p)?,
        None => SyntheticSpec::default(),
    };
    if let Some(n) = a.cases {
        spec.case_count = n;
    }
    if let Some(r) = a.copy_rate {
        spec.copy_rate = r;
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    let corpus = generate_synthetic_with_gold(&spec)?;
    save_corpus(&a.out, &corpus.cases)?;
    if let Some(p) = &a.gold {
        write_jsonl(p, &corpus.gold)?;
    }
    if let Some(p) = &a.lexicon {
        write_json(p, &corpus.lexicon)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SentenceRecord<'a> {
    id: &'a str,
    sentence_index: usize,
    text: &'a str,
    tokens: Vec<&'a str>,
}

fn split_sentences(a: SplitSentencesArgs) -> Result<()> {
    let corpus = load(&a.corpus)?;
    let records: Vec<SentenceRecord> = corpus
        .documents
        .iter()
        .flat_map(|d| {
            d.sentences.iter().map(|s| SentenceRecord {
                id: &d.case_id,
                sentence_index: s.index,
                text: &s.text,
                tokens: s.tokens.iter().map(|t| t.surface.as_str()).collect(),
            })
        })
        .collect();
    Ok(write_jsonl(&a.out, &records)?)
}

fn rule_splitter(method: SegmentMethod, hooks: &LexiconHooks, patterns: Option<&Path>) -> Result<RuleSplitter> {
    let patterns = match patterns {
        Some(p) => RulePatterns::load(p)?,
        None => RulePatterns::default(),
    };
    Ok(match method {
        SegmentMethod::Fullstop => RuleSplitter::FullStop {
            marks: patterns.fullstop_marks,
        },
        SegmentMethod::FullstopVerb => RuleSplitter::FullStopVerb {
            marks: patterns.fullstop_marks,
            hooks: hooks.clone(),
        },
        SegmentMethod::Clause => RuleSplitter::Clause { hooks: hooks.clone() },
        SegmentMethod::Clinical => RuleSplitter::Clinical(RuleConfig::all(patterns, hooks.clone())),
        SegmentMethod::Pointer | SegmentMethod::Gold => unreachable!("not a rule-based method"),
    })
}

fn segment(a: SegmentArgs) -> Result<()> {
    let corpus = load(&a.corpus)?;
    let bounds = match a.method {
        SegmentMethod::Pointer => {
            let Some(model) = &a.model else {
                return usage("--model is required for the pointer method");
            };
            model_boundaries(&corpus.documents, &load_segmenter(model)?)
        }
        SegmentMethod::Gold => return usage("gold boundaries come from the corpus annotation, not from a method"),
        m => rule_boundaries(&corpus.documents, &rule_splitter(m, &corpus.hooks, a.patterns.as_deref())?),
    };
    Ok(write_jsonl(&a.out, &boundary_records(&corpus.documents, &bounds))?)
}

fn train_segmenter(a: TrainSegmenterArgs, seed: Option<u64>) -> Result<()> {
    let mut config: SegmenterConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => SegmenterConfig::default(),
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    let corpus = load(&a.corpus)?;
    let gold = load_boundaries(&corpus, &a.gold)?;
    let data: Vec<_> = corpus
        .documents
        .iter()
        .zip(&gold)
        .flat_map(|(d, g)| d.sentences.iter().zip(g).map(|(s, b)| (s.tokens.clone(), b.clone())))
        .take(a.max_sentences)
        .collect();
    let (model, log) = segmenter_train(&data, config)?;
    model.to_checkpoint().save(&a.out)?;
    if let Some(p) = &a.log {
        write_json(p, &log)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SegmentationEval {
    sentences: usize,
    micro: segsum_core::Prf,
    macro_avg: segsum_core::Prf,
    fullstop_micro: segsum_core::Prf,
    fullstop_macro: segsum_core::Prf,
}

fn eval_segmenter(a: EvalSegmenterArgs) -> Result<()> {
    let corpus = load(&a.corpus)?;
    let gold = load_boundaries(&corpus, &a.gold)?;
    let predicted = match (&a.predicted, &a.model) {
        (Some(p), _) => load_boundaries(&corpus, p)?,
        (None, Some(m)) => model_boundaries(&corpus.documents, &load_segmenter(m)?),
        (None, None) => return usage("one of --predicted or --model is required"),
    };
    let (mut tally, mut base) = (BoundaryTally::default(), BoundaryTally::default());
    for ((doc, pred), gold) in corpus.documents.iter().zip(&predicted).zip(&gold) {
        for ((s, p), g) in doc.sentences.iter().zip(pred).zip(gold) {
            tally.add(p, g);
            base.add(&split_fullstop(s.index, &s.tokens), g);
        }
    }
    let report = SegmentationEval {
        sentences: tally.sentences,
        micro: tally.micro(),
        macro_avg: tally.macro_avg(),
        fullstop_micro: base.micro(),
        fullstop_macro: base.macro_avg(),
    };
    emit_json(a.out.as_deref(), &report)
}

#[derive(Serialize)]
struct OracleRecord<'a> {
    id: &'a str,
    kind: UnitKind,
    sentence_index: usize,
    unit_index: usize,
    start: usize,
    end: usize,
    text: &'a str,
    score: f64,
    gold: bool,
}

fn make_oracle(a: MakeOracleArgs) -> Result<()> {
    let corpus = load(&a.corpus)?;
    let bounds = unit_boundaries(&corpus, &a.units)?;
    let mut records = Vec::new();
    for ((doc, case), bs) in corpus.documents.iter().zip(&corpus.cases).zip(&bounds) {
        let units = doc.units(bs, a.units.kind);
        let unit_tokens: Vec<Vec<String>> = units.iter().map(|u| doc.unit_rouge_tokens(u, a.rouge_mode)).collect();
        let summary = rouge_tokens(&case.summary_text, a.rouge_mode);
        for l in make_oracle_labels(&units, &unit_tokens, &summary, a.budget, a.rule) {
            records.push(OracleRecord {
                id: &doc.case_id,
                kind: l.unit.kind,
                sentence_index: l.unit.sentence_index,
                unit_index: l.unit.unit_index,
                start: l.unit.span.start,
                end: l.unit.span.end,
                text: doc.unit_text(&l.unit),
                score: l.score,
                gold: l.gold,
            });
        }
    }
    Ok(write_jsonl(&a.out, &records)?)
}

#[derive(Serialize)]
struct SummarizerTrainReport {
    budget_chars: usize,
    train_cases: usize,
    dev_cases: usize,
    log: segsum_core::summarizer::SummarizerTrainLog,
}

fn train_summarizer(a: TrainSummarizerArgs, seed: Option<u64>) -> Result<()> {
    let mut config: SummarizerConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => SummarizerConfig::default(),
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    let corpus = load(&a.corpus)?;
    let bounds = unit_boundaries(&corpus, &a.units)?;
    let (train_ids, dev_ids) = holdout(corpus.cases.len(), a.dev_fraction, config.seed)?;
    let budget = a.budget.unwrap_or_else(|| {
        let total: usize = train_ids.iter().map(|&d| corpus.cases[d].summary_text.chars().count()).sum();
        (total as f64 / train_ids.len() as f64).round() as usize
    });
    config.kind = a.units.kind;
    config.selection = Selection::Budget { chars: budget, rule: a.rule };
    let train = prepare_cases(&corpus, &train_ids, &bounds, budget, a.rule, &config)?;
    let dev = prepare_cases(&corpus, &dev_ids, &bounds, budget, a.rule, &config)?;
    let (model, log) = summarizer_train(&train, &dev, config)?;
    model.to_checkpoint().save(&a.out)?;
    if let Some(p) = &a.log {
        write_json(
            p,
            &SummarizerTrainReport {
                budget_chars: budget,
                train_cases: train.len(),
                dev_cases: dev.len(),
                log,
            },
        )?;
    }
    Ok(())
}

fn summarize(a: SummarizeArgs) -> Result<()> {
    let ckpt = Checkpoint::load(&a.model).with_context(|| format!("loading {}", a.model.display()))?;
    let mut model = Summarizer::from_checkpoint(&ckpt)?;
    let rule = match model.config.selection {
        Selection::Budget { rule, .. } => rule,
        Selection::Threshold { .. } => Default::default(),
    };
    model.config.selection = Selection::Budget { chars: a.budget, rule };
    let corpus = load(&a.corpus)?;
    let units = UnitArgs {
        kind: model.config.kind,
        boundaries: a.boundaries.clone(),
    };
    let bounds = unit_boundaries(&corpus, &units)?;
    let outputs = corpus
        .documents
        .iter()
        .zip(&bounds)
        .map(|(doc, bs)| {
            model
                .summarize(doc, doc.units(bs, model.config.kind))
                .map_err(|e| e.in_stage("summarize", Some(&doc.case_id)))
        })
        .collect::<segsum_core::Result<Vec<_>>>()?;
    Ok(write_jsonl(&a.out, &outputs)?)
}

/// A summary keyed by case id; accepts corpus lines and summarizer output.
#[derive(Deserialize)]
struct SummaryLine {
    #[serde(alias = "case_id")]
    id: String,
    #[serde(alias = "summary_text")]
    summary: String,
}

#[derive(Serialize)]
struct CaseScores {
    id: String,
    scores: SummaryScores,
}

#[derive(Serialize)]
struct RougeReport {
    cases: usize,
    mean: SummaryScores,
    per_case: Vec<CaseScores>,
}

fn read_summaries(path: &PathBuf) -> Result<Vec<SummaryLine>> {
    read_jsonl(path).with_context(|| format!("reading summaries {}", path.display()))
}

fn eval_rouge(a: EvalRougeArgs) -> Result<()> {
    let candidates = read_summaries(&a.candidates)?;
    let references: HashMap<String, String> = read_summaries(&a.references)?
        .into_iter()
        .map(|l| (l.id, l.summary))
        .collect();
    let per_case = candidates
        .into_iter()
        .map(|c| match references.get(&c.id) {
            Some(r) => Ok(CaseScores {
                scores: score_summary(&[c.summary.as_str()], r, a.mode),
                id: c.id,
            }),
            None => Err(segsum_core::Error::Validation(format!("no reference for case `{}`", c.id))),
        })
        .collect::<segsum_core::Result<Vec<_>>>()?;
    let all: Vec<SummaryScores> = per_case.iter().map(|c| c.scores).collect();
    let report = RougeReport {
        cases: per_case.len(),
        mean: SummaryScores::mean(&all),
        per_case,
    };
    emit_json(a.out.as_deref(), &report)
}

fn analyze_relations(a: AnalyzeRelationsArgs) -> Result<()> {
    let corpus = load(&a.corpus)?;
    let segments = load_boundaries(&corpus, &a.segments)?;
    let census = relation_census(&corpus.documents, &segments, &clause_boundaries(&corpus));
    write_text(&a.out, &census.to_tsv(true))?;
    if let Some(p) = &a.json {
        write_json(p, &census)?;
    }
    Ok(())
}

fn stats(a: StatsArgs) -> Result<()> {
    let corpus = load(&a.corpus)?;
    let docs = &corpus.documents;
    let mut rows = vec![granularity_stats(docs, &sentence_boundaries(docs), UnitKind::Sentence)];
    if let Some(p) = &a.segments {
        rows.push(granularity_stats(docs, &load_boundaries(&corpus, p)?, UnitKind::Segment));
    }
    rows.push(granularity_stats(docs, &clause_boundaries(&corpus), UnitKind::Clause));
    write_text(&a.out, &granularity_tsv(&rows))?;
    if let Some(p) = &a.json {
        write_json(p, &rows)?;
    }
    Ok(())
}

fn run_experiment_cmd(a: RunExperimentArgs, seed: Option<u64>) -> Result<()> {
    let mut config = match &a.config {
        Some(p) => PipelineConfig::load(p).with_context(|| format!("loading config {}", p.display()))?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = seed {
        config.set_seed(s);
    }
    let output = run_experiment(&config)?;
    output.write(&a.out)?;
    print!("{}", output.report.to_tsv());
    Ok(())
}
