//! Extractive summarization over sentence, segment and clause units.
//!
//! The crate covers the whole pipeline: tokenization and unit splitting,
//! a learned pointer-style segmenter, ROUGE metrics, greedy pseudo-label
//! oracles, a unit-level extractive summarizer and granularity analysis.

pub mod analysis;
pub mod corpus;
pub mod document;
pub mod nn;
pub mod oracle;
pub mod pipeline;
pub mod rouge;
pub mod segmenter;
pub mod summarizer;
pub mod error;
pub mod splitters;
pub mod tokenize;

pub use analysis::{GranularityStats, Prf, RelationCensus, RelationType};
pub use corpus::{Case, GoldBoundaries, SyntheticSpec, TextSpan, Unit, UnitKind};
pub use document::{DocSentence, Document};
pub use error::{Error, Result};
pub use nn::Checkpoint;
pub use oracle::{BudgetRule, LabeledUnit, DEFAULT_BUDGET_CHARS};
pub use pipeline::{ExperimentReport, PipelineConfig, SegmentMethod};
pub use rouge::{RougeMode, RougeScore, SummaryScores};
pub use segmenter::{PointerSegmenter, SegmenterConfig};
pub use splitters::{BoundarySet, RuleSplitter};
pub use summarizer::{Selection, Summarizer, SummarizerConfig, SummaryOutput};
pub use tokenize::{LexiconHooks, SubwordHasher, Token, TokenTag};
