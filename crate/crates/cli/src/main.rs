use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use segsum_core::{BudgetRule, RougeMode, SegmentMethod, UnitKind};

mod commands;

use commands::UsageError;

/// Segment clinical records and train extractive summarizers over
/// sentence, segment or clause units.
#[derive(Debug, Parser)]
#[command(name = "segsum", version)]
struct Cli {
    /// Replace every seed in the loaded configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus with planted segment boundaries.
    GenSynthetic(GenSyntheticArgs),
    /// Split every record line into numbered, tokenized sentences.
    SplitSentences(SplitSentencesArgs),
    /// Predict segment boundaries with a rule-based method or a trained model.
    Segment(SegmentArgs),
    /// Train the pointer segmenter on gold boundaries.
    TrainSegmenter(TrainSegmenterArgs),
    /// Score predicted boundaries against gold, next to the full-stop baseline.
    EvalSegmenter(EvalSegmenterArgs),
    /// Label units with the greedy ROUGE-2 oracle under a character budget.
    MakeOracle(MakeOracleArgs),
    /// Train an extractive summarizer for one unit kind.
    TrainSummarizer(TrainSummarizerArgs),
    /// Extract summaries with a trained summarizer.
    Summarize(SummarizeArgs),
    /// ROUGE-1/2/L of candidate summaries against references.
    EvalRouge(EvalRougeArgs),
    /// Count how segments and clauses overlap.
    AnalyzeRelations(AnalyzeRelationsArgs),
    /// Units per sentence and mean unit lengths for each kind.
    Stats(StatsArgs),
    /// Run the whole pipeline from a configuration file.
    RunExperiment(RunExperimentArgs),
}

#[derive(Debug, Args)]
struct CorpusArgs {
    /// Corpus in JSON lines: {"id", "records", "summary"}.
    #[arg(long)]
    input: PathBuf,
    /// Lexicon hooks (JSON). Defaults to empty lists.
    #[arg(long)]
    hooks: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenSyntheticArgs {
    /// Generator settings (JSON); flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    cases: Option<usize>,
    #[arg(long)]
    copy_rate: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    /// Also write the planted boundaries here.
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Also write the matching lexicon hooks here.
    #[arg(long)]
    lexicon: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SplitSentencesArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SegmentArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// pointer, fullstop, fullstop-verb, clause or clinical.
    #[arg(long, default_value = "pointer")]
    method: SegmentMethod,
    /// Trained segmenter checkpoint, required by the pointer method.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Clinical rule patterns (JSON).
    #[arg(long)]
    patterns: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainSegmenterArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Gold boundaries in JSON lines: {"id", "sentence_index", "boundaries"}.
    #[arg(long)]
    gold: PathBuf,
    /// Segmenter hyperparameters (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 4000)]
    max_sentences: usize,
    #[arg(long)]
    out: PathBuf,
    /// Write per-epoch losses here.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalSegmenterArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    gold: PathBuf,
    /// Predicted boundaries in the gold format.
    #[arg(long, conflicts_with = "model")]
    predicted: Option<PathBuf>,
    /// Segmenter checkpoint to predict with.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Report destination (JSON). Printed when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct UnitArgs {
    #[arg(long)]
    kind: UnitKind,
    /// Segment boundaries in the gold format; required for the segment kind.
    #[arg(long)]
    boundaries: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MakeOracleArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    units: UnitArgs,
    #[arg(long, default_value_t = segsum_core::DEFAULT_BUDGET_CHARS)]
    budget: usize,
    #[arg(long, default_value = "keep-crossing", value_parser = parse_rule)]
    rule: BudgetRule,
    #[arg(long, default_value = "token", value_parser = parse_mode)]
    rouge_mode: RougeMode,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainSummarizerArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    units: UnitArgs,
    /// Summarizer hyperparameters (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Oracle and selection budget. Defaults to the mean reference length
    /// of the training cases.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, default_value = "keep-crossing", value_parser = parse_rule)]
    rule: BudgetRule,
    /// Fraction of cases held out for best-epoch selection.
    #[arg(long, default_value_t = 0.1)]
    dev_fraction: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SummarizeArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    model: PathBuf,
    /// Segment boundaries in the gold format; required for segment models.
    #[arg(long)]
    boundaries: Option<PathBuf>,
    #[arg(long, default_value_t = segsum_core::DEFAULT_BUDGET_CHARS)]
    budget: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalRougeArgs {
    /// JSON lines with an id ("id" or "case_id") and a text ("summary" or "summary_text").
    #[arg(long)]
    candidates: PathBuf,
    #[arg(long)]
    references: PathBuf,
    #[arg(long, default_value = "token", value_parser = parse_mode)]
    mode: RougeMode,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeRelationsArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Segment boundaries in the gold format.
    #[arg(long)]
    segments: PathBuf,
    /// TSV table.
    #[arg(long)]
    out: PathBuf,
    /// Also write the census as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Segment boundaries; the segment row is omitted without them.
    #[arg(long)]
    segments: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunExperimentArgs {
    /// Pipeline configuration (JSON). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for report.json, report.tsv and checkpoints.
    #[arg(long)]
    out: PathBuf,
}

fn parse_rule(s: &str) -> Result<BudgetRule, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| format!("`{s}` is not one of keep-crossing, drop-crossing"))
}

fn parse_mode(s: &str) -> Result<RougeMode, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| format!("`{s}` is not one of token, char"))
}

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<segsum_core::Error>() {
        Some(e) if e.is_numeric() => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

/// The context chain down to the first core error, whose own message
/// already names its causes.
fn describe(err: &anyhow::Error) -> String {
    let mut parts = Vec::new();
    for cause in err.chain() {
        parts.push(cause.to_string());
        if cause.is::<segsum_core::Error>() {
            break;
        }
    }
    parts.join(": ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
