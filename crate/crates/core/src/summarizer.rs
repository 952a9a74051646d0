//! Unit-level extractive summarizer.
//!
//! A document becomes one token stream with a `[CLS]` before and a `[SEP]`
//! after every sentence. Tokens are embedded from hashed n-grams, encoded
//! by a bidirectional GRU, pooled per unit (the `[CLS]` vector for whole
//! sentences, the mean of member token vectors otherwise), shifted by
//! sinusoidal unit positions, contextualised by a transformer and scored
//! with `p = sigmoid(W_o s + b_o)`.

use std::ops::Range;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Unit, UnitKind};
use crate::document::Document;
use crate::error::{Error, Result};
use crate::nn::{
    sigmoid, sigmoid_bce, sinusoidal_positions, train_step, AdamConfig, BiGru, BiGruCache,
    Checkpoint, EmbeddingBag, EncoderCache, Linear, ParameterStore, Tensor, Trainable,
    TransformerEncoder, Vector,
};
use crate::oracle::{select_with_budget, BudgetRule, DEFAULT_BUDGET_CHARS};
use crate::rouge::{score_summary, RougeMode, SummaryScores};
use crate::tokenize::{embed_token_id, SubwordHasher};

pub const SUMMARIZER_KIND: &str = "summarizer";

/// How units are chosen from the scored document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Selection {
    Budget { chars: usize, rule: BudgetRule },
    Threshold { probability: f64 },
}

impl Default for Selection {
    fn default() -> Self {
        Selection::Budget {
            chars: DEFAULT_BUDGET_CHARS,
            rule: BudgetRule::KeepCrossing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SummarizerConfig {
    pub kind: UnitKind,
    pub hasher: SubwordHasher,
    pub embed_dim: usize,
    /// Per direction; the unit width is twice this.
    pub hidden: usize,
    pub layers: usize,
    pub ff_dim: usize,
    pub max_tokens: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub selection: Selection,
    pub rouge_mode: RougeMode,
    pub seed: u64,
}

impl Default for SummarizerConfig {
    fn default() -> Self {
        SummarizerConfig {
            kind: UnitKind::Segment,
            hasher: SubwordHasher {
                bucket_count: 1 << 15,
                ..SubwordHasher::default()
            },
            embed_dim: 32,
            hidden: 32,
            layers: 1,
            ff_dim: 128,
            max_tokens: 1024,
            epochs: 4,
            batch_size: 1,
            adam: AdamConfig {
                lr: 3e-3,
                ..AdamConfig::default()
            },
            selection: Selection::default(),
            rouge_mode: RougeMode::Token,
            seed: 11,
        }
    }
}

impl SummarizerConfig {
    pub fn validate(&self) -> Result<()> {
        self.hasher.validate()?;
        if self.embed_dim == 0 || self.hidden == 0 || self.ff_dim == 0 {
            return Err(Error::Validation("summarizer dimensions must be positive".into()));
        }
        if self.max_tokens < 3 || self.batch_size == 0 {
            return Err(Error::Validation("max_tokens must be at least 3 and batch_size positive".into()));
        }
        if let Selection::Threshold { probability } = self.selection {
            if !(0.0..=1.0).contains(&probability) {
                return Err(Error::Validation(format!("threshold {probability} is outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn unit_dim(&self) -> usize {
        2 * self.hidden
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputToken {
    Cls,
    Sep,
    Word(Vec<usize>),
}

/// Where a unit's vector comes from in the encoded stream.
#[derive(Debug, Clone, PartialEq)]
pub enum Pool {
    Cls(usize),
    Mean(Range<usize>),
}

/// The model-ready form of one document.
#[derive(Debug, Clone, PartialEq)]
pub struct SummarizerInput {
    pub stream: Vec<InputToken>,
    /// One entry per unit; `None` when the unit lies past the token window.
    pub pools: Vec<Option<Pool>>,
}

impl SummarizerInput {
    pub fn build(doc: &Document, units: &[Unit], kind: UnitKind, hasher: &SubwordHasher, max_tokens: usize) -> Result<Self> {
        if doc.sentences.is_empty() || units.is_empty() {
            return Err(Error::Validation(format!("document `{}` is empty", doc.case_id)));
        }
        let mut stream = Vec::new();
        let mut cls_pos = Vec::with_capacity(doc.sentences.len());
        let mut word_start = Vec::with_capacity(doc.sentences.len());
        for s in &doc.sentences {
            cls_pos.push(stream.len());
            stream.push(InputToken::Cls);
            word_start.push(stream.len());
            stream.extend(s.tokens.iter().map(|t| InputToken::Word(embed_token_id(t, hasher))));
            stream.push(InputToken::Sep);
        }
        stream.truncate(max_tokens);
        let window = stream.len();

        let mut pools = Vec::with_capacity(units.len());
        for u in units {
            if u.kind != kind {
                return Err(Error::Validation(format!(
                    "unit kind {} does not match summarizer kind {}",
                    u.kind.as_str(),
                    kind.as_str()
                )));
            }
            let sentence = doc.sentences.get(u.sentence_index).ok_or_else(|| {
                Error::Validation(format!("unit refers to missing sentence {}", u.sentence_index))
            })?;
            if u.tokens.start >= u.tokens.end || u.tokens.end > sentence.tokens.len() {
                return Err(Error::Validation(format!(
                    "unit tokens {:?} outside sentence {} of {} tokens",
                    u.tokens,
                    u.sentence_index,
                    sentence.tokens.len()
                )));
            }
            let pool = if kind == UnitKind::Sentence {
                let p = cls_pos[u.sentence_index];
                (p < window).then_some(Pool::Cls(p))
            } else {
                let base = word_start[u.sentence_index];
                let start = base + u.tokens.start;
                let end = (base + u.tokens.end).min(window);
                (start < end).then_some(Pool::Mean(start..end))
            };
            pools.push(pool);
        }
        Ok(SummarizerInput { stream, pools })
    }

    pub fn visible(&self) -> usize {
        self.pools.iter().filter(|p| p.is_some()).count()
    }
}

/// A document prepared for training or evaluation.
#[derive(Debug, Clone)]
pub struct PreparedCase {
    pub case_id: String,
    pub input: SummarizerInput,
    pub units: Vec<Unit>,
    pub unit_texts: Vec<String>,
    pub labels: Vec<bool>,
    pub reference: String,
}

impl PreparedCase {
    pub fn new(
        doc: &Document,
        units: Vec<Unit>,
        labels: Vec<bool>,
        reference: &str,
        config: &SummarizerConfig,
    ) -> Result<Self> {
        if labels.len() != units.len() {
            return Err(Error::Validation(format!(
                "{} labels for {} units in `{}`",
                labels.len(),
                units.len(),
                doc.case_id
            )));
        }
        let input = SummarizerInput::build(doc, &units, config.kind, &config.hasher, config.max_tokens)?;
        let unit_texts = units.iter().map(|u| doc.unit_text(u).to_string()).collect();
        Ok(PreparedCase {
            case_id: doc.case_id.clone(),
            input,
            units,
            unit_texts,
            labels,
            reference: reference.to_string(),
        })
    }
}

/// Selected units and the extracted text for one case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryOutput {
    pub case_id: String,
    pub selected_units: Vec<UnitRef>,
    pub summary_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitRef {
    pub sentence_index: usize,
    pub unit_index: usize,
}

struct ForwardCache {
    x: Tensor,
    enc: Tensor,
    enc_cache: BiGruCache,
    visible: Vec<usize>,
    tf_cache: Option<EncoderCache>,
    tf_out: Tensor,
}

#[derive(Debug, Clone)]
pub struct Summarizer {
    pub config: SummarizerConfig,
    store: ParameterStore,
    embed: EmbeddingBag,
    cls: Vector,
    sep: Vector,
    encoder: BiGru,
    context: TransformerEncoder,
    out: Linear,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SummarizerTrainLog {
    pub epoch_losses: Vec<f64>,
    pub dev_scores: Vec<SummaryScores>,
    pub best_epoch: usize,
}

impl Summarizer {
    pub fn new(config: SummarizerConfig) -> Result<Self> {
        config.validate()?;
        let mut store = ParameterStore::new(config.seed);
        let d = config.unit_dim();
        let embed = EmbeddingBag::new(&mut store, "sum.embed", config.hasher.bucket_count, config.embed_dim)?;
        let cls = Vector::new(&mut store, "sum.cls", config.embed_dim)?;
        let sep = Vector::new(&mut store, "sum.sep", config.embed_dim)?;
        let encoder = BiGru::new(&mut store, "sum.enc", config.embed_dim, config.hidden)?;
        let context = TransformerEncoder::new(&mut store, "sum.ctx", config.layers, d, config.ff_dim)?;
        let out = Linear::new(&mut store, "sum.out", d, 1)?;
        Ok(Summarizer {
            config,
            store,
            embed,
            cls,
            sep,
            encoder,
            context,
            out,
        })
    }

    pub fn store(&self) -> &ParameterStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ParameterStore {
        &mut self.store
    }

    /// Contextual token vectors for the whole stream.
    pub fn encode_tokens(&self, input: &SummarizerInput) -> Tensor {
        self.encode_tokens_cached(input).1
    }

    fn encode_tokens_cached(&self, input: &SummarizerInput) -> (Tensor, Tensor, BiGruCache) {
        let e = self.config.embed_dim;
        let mut x = Tensor::zeros(&[input.stream.len(), e]);
        for (i, tok) in input.stream.iter().enumerate() {
            let v = match tok {
                InputToken::Cls => self.cls.value(&self.store).to_vec(),
                InputToken::Sep => self.sep.value(&self.store).to_vec(),
                InputToken::Word(ids) => self.embed.embed(&self.store, ids),
            };
            x.row_mut(i).copy_from_slice(&v);
        }
        let (enc, cache) = self.encoder.forward(&self.store, &x);
        (x, enc, cache)
    }

    /// Pooled unit vectors `[visible units, d]` and their unit indices.
    pub fn pool(&self, input: &SummarizerInput, enc: &Tensor) -> (Tensor, Vec<usize>) {
        let d = self.config.unit_dim();
        let visible: Vec<usize> = (0..input.pools.len()).filter(|&i| input.pools[i].is_some()).collect();
        let mut pooled = Tensor::zeros(&[visible.len(), d]);
        for (r, &u) in visible.iter().enumerate() {
            let row = pooled.row_mut(r);
            match input.pools[u].as_ref().expect("visible unit") {
                Pool::Cls(p) => row.copy_from_slice(enc.row(*p)),
                Pool::Mean(span) => {
                    for t in span.clone() {
                        for (a, b) in row.iter_mut().zip(enc.row(t)) {
                            *a += b;
                        }
                    }
                    let k = span.len() as f64;
                    for a in row.iter_mut() {
                        *a /= k;
                    }
                }
            }
        }
        (pooled, visible)
    }

    fn forward(&self, input: &SummarizerInput) -> (Vec<f64>, ForwardCache) {
        let (x, enc, enc_cache) = self.encode_tokens_cached(input);
        let (mut pooled, visible) = self.pool(input, &enc);
        if !visible.is_empty() {
            pooled.add_assign(&sinusoidal_positions(visible.len(), self.config.unit_dim()));
        }
        let (tf_out, tf_cache) = if visible.is_empty() {
            (pooled, None)
        } else {
            let (out, cache) = self.context.forward(&self.store, &pooled);
            (out, Some(cache))
        };
        let logits = if visible.is_empty() {
            Vec::new()
        } else {
            self.out.forward(&self.store, &tf_out).into_data()
        };
        (
            logits,
            ForwardCache {
                x,
                enc,
                enc_cache,
                visible,
                tf_cache,
                tf_out,
            },
        )
    }

    /// One logit per unit; units past the token window get `-inf`.
    pub fn unit_logits(&self, input: &SummarizerInput) -> Vec<f64> {
        let (logits, cache) = self.forward(input);
        let mut all = vec![f64::NEG_INFINITY; input.pools.len()];
        for (l, &u) in logits.iter().zip(&cache.visible) {
            all[u] = *l;
        }
        all
    }

    pub fn unit_probabilities(&self, input: &SummarizerInput) -> Vec<f64> {
        self.unit_logits(input).into_iter().map(sigmoid).collect()
    }

    /// Mean BCE over visible units; accumulates `scale` times its gradient.
    pub fn loss_and_grad(&mut self, case: &PreparedCase, scale: f64) -> Result<f64> {
        let (logits, cache) = self.forward(&case.input);
        if logits.is_empty() {
            return Err(Error::Validation(format!("no unit of `{}` fits the token window", case.case_id)));
        }
        let labels: Vec<f64> = cache
            .visible
            .iter()
            .map(|&u| if case.labels[u] { 1.0 } else { 0.0 })
            .collect();
        let (loss, dlogits) = sigmoid_bce(&logits, &labels)?;
        let dlogits: Vec<f64> = dlogits.into_iter().map(|g| g * scale).collect();
        let dlogits = Tensor::from_vec(&[dlogits.len(), 1], dlogits)?;
        let dtf = self.out.backward(&mut self.store, &cache.tf_out, &dlogits);
        let tf_cache = cache.tf_cache.as_ref().expect("visible units were encoded");
        let dpooled = self.context.backward(&mut self.store, tf_cache, &dtf);

        let mut denc = Tensor::zeros(cache.enc.shape());
        for (r, &u) in cache.visible.iter().enumerate() {
            let g = dpooled.row(r);
            match case.input.pools[u].as_ref().expect("visible unit") {
                Pool::Cls(p) => {
                    for (a, b) in denc.row_mut(*p).iter_mut().zip(g) {
                        *a += b;
                    }
                }
                Pool::Mean(span) => {
                    let k = span.len() as f64;
                    for t in span.clone() {
                        for (a, b) in denc.row_mut(t).iter_mut().zip(g) {
                            *a += b / k;
                        }
                    }
                }
            }
        }
        let dx = self.encoder.backward(&mut self.store, &cache.enc_cache, &denc);
        debug_assert_eq!(dx.shape(), cache.x.shape());
        for (i, tok) in case.input.stream.iter().enumerate() {
            match tok {
                InputToken::Cls => self.cls.backward(&mut self.store, dx.row(i)),
                InputToken::Sep => self.sep.backward(&mut self.store, dx.row(i)),
                InputToken::Word(ids) => self.embed.backward(&mut self.store, ids, dx.row(i)),
            }
        }
        Ok(loss)
    }

    /// Selection flags per unit under the configured rule.
    pub fn select(&self, logits: &[f64], units: &[Unit]) -> Vec<bool> {
        select_units(logits, units, self.config.selection)
    }

    pub fn summarize_prepared(&self, case: &PreparedCase) -> SummaryOutput {
        let logits = self.unit_logits(&case.input);
        let chosen = self.select(&logits, &case.units);
        let mut selected_units = Vec::new();
        let mut texts = Vec::new();
        for (i, u) in case.units.iter().enumerate() {
            if chosen[i] {
                selected_units.push(UnitRef {
                    sentence_index: u.sentence_index,
                    unit_index: u.unit_index,
                });
                texts.push(case.unit_texts[i].as_str());
            }
        }
        SummaryOutput {
            case_id: case.case_id.clone(),
            selected_units,
            summary_text: texts.join(" "),
        }
    }

    /// Summarize a document given its units of the model's kind.
    pub fn summarize(&self, doc: &Document, units: Vec<Unit>) -> Result<SummaryOutput> {
        let labels = vec![false; units.len()];
        let case = PreparedCase::new(doc, units, labels, "", &self.config)?;
        Ok(self.summarize_prepared(&case))
    }

    /// ROUGE of the selected units against each case's reference.
    pub fn evaluate(&self, cases: &[PreparedCase]) -> SummaryScores {
        let scores: Vec<SummaryScores> = cases
            .iter()
            .map(|c| {
                let out = self.summarize_prepared(c);
                let texts = selected_texts(c, &out);
                score_summary(&texts, &c.reference, self.config.rouge_mode)
            })
            .collect();
        SummaryScores::mean(&scores)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let hp = serde_json::to_value(&self.config).expect("config serializes");
        Checkpoint::from_store(&self.store, SUMMARIZER_KIND, hp, false)
    }

    pub fn from_checkpoint(checkpoint: &Checkpoint) -> Result<Self> {
        checkpoint.expect_kind(SUMMARIZER_KIND)?;
        let config: SummarizerConfig = serde_json::from_value(checkpoint.hyperparameters.clone())
            .map_err(|e| Error::Checkpoint(format!("bad summarizer hyperparameters: {e}")))?;
        let mut model = Summarizer::new(config)?;
        checkpoint.restore_into(&mut model.store)?;
        Ok(model)
    }
}

/// Texts of the selected units, in document order.
pub fn selected_texts<'a>(case: &'a PreparedCase, out: &SummaryOutput) -> Vec<&'a str> {
    case.units
        .iter()
        .zip(&case.unit_texts)
        .filter(|(u, _)| {
            out.selected_units
                .iter()
                .any(|r| r.sentence_index == u.sentence_index && r.unit_index == u.unit_index)
        })
        .map(|(_, t)| t.as_str())
        .collect()
}

/// Apply a selection rule to unit logits. Ranking uses the logits directly,
/// so ties broken by saturation of the sigmoid cannot occur.
pub fn select_units(logits: &[f64], units: &[Unit], selection: Selection) -> Vec<bool> {
    match selection {
        Selection::Budget { chars, rule } => {
            let lengths: Vec<usize> = units.iter().map(|u| u.text_len).collect();
            let mut chosen = select_with_budget(logits, &lengths, chars, rule);
            for (c, l) in chosen.iter_mut().zip(logits) {
                if *l == f64::NEG_INFINITY {
                    *c = false;
                }
            }
            chosen
        }
        Selection::Threshold { probability } => logits.iter().map(|&l| sigmoid(l) >= probability).collect(),
    }
}

impl Trainable for Summarizer {
    type Example = PreparedCase;

    fn store(&self) -> &ParameterStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParameterStore {
        &mut self.store
    }

    fn accumulate(&mut self, case: &PreparedCase, scale: f64) -> Result<f64> {
        self.loss_and_grad(case, scale)
    }
}

/// Train on `train`, scoring `dev` after every epoch and keeping the
/// parameters of the best dev ROUGE-1 F1 (the last epoch when `dev` is
/// empty).
pub fn summarizer_train(
    train: &[PreparedCase],
    dev: &[PreparedCase],
    config: SummarizerConfig,
) -> Result<(Summarizer, SummarizerTrainLog)> {
    if train.is_empty() {
        return Err(Error::Validation("summarizer training set is empty".into()));
    }
    let mut model = Summarizer::new(config.clone())?;
    for case in train.iter().chain(dev) {
        if let Some(u) = case.units.iter().find(|u| u.kind != config.kind) {
            return Err(Error::Validation(format!(
                "case `{}` has {} units but the summarizer is trained on {}",
                case.case_id,
                u.kind.as_str(),
                config.kind.as_str()
            )));
        }
    }
    let mut examples: Vec<PreparedCase> = train.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5a5a_0001);
    let mut log = SummarizerTrainLog::default();
    let mut best: Option<(f64, ParameterStore)> = None;
    for epoch in 0..config.epochs {
        examples.shuffle(&mut rng);
        let mut total = 0.0;
        let mut batches = 0;
        for batch in examples.chunks(config.batch_size) {
            total += train_step(&mut model, batch, &config.adam)?;
            batches += 1;
        }
        log.epoch_losses.push(total / batches as f64);
        if !dev.is_empty() {
            let scores = model.evaluate(dev);
            let f = scores.rouge1.f1;
            if best.as_ref().is_none_or(|(b, _)| f > *b) {
                best = Some((f, model.store.clone()));
                log.best_epoch = epoch;
            }
            log.dev_scores.push(scores);
        } else {
            log.best_epoch = epoch;
        }
    }
    if let Some((_, store)) = best {
        model.store = store;
    }
    Ok((model, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Case;
    use crate::nn::{check_gradients, DEFAULT_STEP};
    use crate::splitters::BoundarySet;
    use crate::tokenize::LexiconHooks;
    use proptest::prelude::*;

    fn tiny(kind: UnitKind, seed: u64) -> SummarizerConfig {
        SummarizerConfig {
            kind,
            hasher: SubwordHasher::new(2, 3, 64, 3).unwrap(),
            embed_dim: 4,
            hidden: 3,
            layers: 1,
            ff_dim: 5,
            seed,
            ..SummarizerConfig::default()
        }
    }

    fn doc(lines: &[&str]) -> Document {
        let case = Case {
            id: "t".into(),
            record_sentences: lines.iter().map(|s| s.to_string()).collect(),
            summary_text: "r".into(),
        };
        Document::from_case(&case, &LexiconHooks::default())
    }

    fn segment_units(d: &Document) -> Vec<Unit> {
        let b: Vec<BoundarySet> = d
            .sentences
            .iter()
            .map(|s| {
                let commas: Vec<usize> = (0..s.tokens.len()).filter(|&i| s.tokens[i].surface == ",").collect();
                BoundarySet::from_candidates(s.index, commas, s.tokens.len())
            })
            .collect();
        d.units(&b, UnitKind::Segment)
    }

    fn prepared(d: &Document, kind: UnitKind, labels: impl Fn(usize) -> bool, cfg: &SummarizerConfig) -> PreparedCase {
        let units = if kind == UnitKind::Sentence { d.sentence_units() } else { segment_units(d) };
        let l = (0..units.len()).map(labels).collect();
        PreparedCase::new(d, units, l, "x y 。", cfg).unwrap()
    }

    fn toy_gradcheck(kind: UnitKind) {
        let cfg = tiny(kind, 4);
        let mut m = Summarizer::new(cfg.clone()).unwrap();
        let d = doc(&["aa bb , cc 。", "dd , ee ff"]);
        let case = prepared(&d, kind, |i| i % 2 == 0, &cfg);
        // Nonzero biases so their gradients are exercised.
        let names: Vec<String> = m.store().names().map(str::to_string).collect();
        for (i, n) in names.iter().enumerate() {
            if n.ends_with(".b") || n.ends_with(".bias") {
                for (j, v) in m.store_mut().value_mut(n).data_mut().iter_mut().enumerate() {
                    *v = 0.05 * ((i + j) % 5) as f64 - 0.1;
                }
            }
        }
        let mut store = m.store().clone();
        let report = check_gradients(
            &mut store,
            |s| {
                std::mem::swap(m.store_mut(), s);
                let l = m.loss_and_grad(&case, 1.0).unwrap();
                std::mem::swap(m.store_mut(), s);
                l
            },
            DEFAULT_STEP,
            10,
        );
        assert!(report.max_rel_error < 1e-4, "{report:?}");
        assert!(report.checked > 50);
    }

    #[test]
    fn gradient_check_two_sentence_segments() {
        toy_gradcheck(UnitKind::Segment);
    }

    #[test]
    fn gradient_check_two_sentence_sentences() {
        toy_gradcheck(UnitKind::Sentence);
    }

    #[test]
    fn single_token_unit_pools_to_token_vector() {
        let cfg = tiny(UnitKind::Segment, 1);
        let m = Summarizer::new(cfg.clone()).unwrap();
        let d = doc(&["aa , bb cc"]);
        let b = vec![BoundarySet::new(0, vec![0, 1], 4).unwrap()];
        let units = d.units(&b, UnitKind::Segment);
        let input = SummarizerInput::build(&d, &units, UnitKind::Segment, &cfg.hasher, 1024).unwrap();
        let enc = m.encode_tokens(&input);
        let (pooled, _) = m.pool(&input, &enc);
        assert_eq!(pooled.row(0), enc.row(1));
        assert_eq!(pooled.row(1), enc.row(2));
    }

    #[test]
    fn pooling_excludes_boundary_tokens_and_is_exact_mean() {
        let cfg = tiny(UnitKind::Segment, 2);
        let m = Summarizer::new(cfg.clone()).unwrap();
        let d = doc(&["aa bb , cc dd ee", "ff gg"]);
        let units = segment_units(&d);
        let input = SummarizerInput::build(&d, &units, UnitKind::Segment, &cfg.hasher, 1024).unwrap();
        assert_eq!(input.stream.len(), 2 + 6 + 2 + 2);
        let enc = m.encode_tokens(&input);
        let (pooled, _) = m.pool(&input, &enc);
        let spans = [1..4, 4..7, 9..11];
        for (r, span) in spans.iter().enumerate() {
            for c in 0..cfg.unit_dim() {
                let mean: f64 = span.clone().map(|t| enc.row(t)[c]).sum::<f64>() / span.len() as f64;
                assert!((pooled.row(r)[c] - mean).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn constant_token_vectors_pool_to_constant() {
        let cfg = tiny(UnitKind::Segment, 2);
        let m = Summarizer::new(cfg.clone()).unwrap();
        let d = doc(&["aa bb , cc dd ee"]);
        let units = segment_units(&d);
        let input = SummarizerInput::build(&d, &units, UnitKind::Segment, &cfg.hasher, 1024).unwrap();
        let enc = Tensor::full(&[input.stream.len(), cfg.unit_dim()], 0.37);
        let (pooled, _) = m.pool(&input, &enc);
        assert!(pooled.data().iter().all(|v| (v - 0.37).abs() < 1e-15));
    }

    #[test]
    fn zero_output_layer_gives_one_half() {
        let cfg = tiny(UnitKind::Segment, 5);
        let mut m = Summarizer::new(cfg.clone()).unwrap();
        m.store_mut().value_mut("sum.out.w").fill(0.0);
        m.store_mut().value_mut("sum.out.b").fill(0.0);
        let d = doc(&["aa bb , cc dd ee", "ff gg"]);
        let case = prepared(&d, UnitKind::Segment, |_| false, &cfg);
        assert!(m.unit_probabilities(&case.input).iter().all(|&p| p == 0.5));
    }

    #[test]
    fn empty_document_rejected() {
        let cfg = tiny(UnitKind::Sentence, 0);
        let d = doc(&[]);
        assert!(SummarizerInput::build(&d, &[], UnitKind::Sentence, &cfg.hasher, 1024).is_err());
    }

    #[test]
    fn kind_mismatch_rejected() {
        let cfg = tiny(UnitKind::Sentence, 0);
        let d = doc(&["aa , bb"]);
        let units = segment_units(&d);
        assert!(SummarizerInput::build(&d, &units, UnitKind::Sentence, &cfg.hasher, 1024).is_err());
    }

    #[test]
    fn truncation_hides_tail_units() {
        let cfg = tiny(UnitKind::Sentence, 0);
        let d = doc(&["aa bb", "cc dd", "ee ff"]);
        let units = d.sentence_units();
        let input = SummarizerInput::build(&d, &units, UnitKind::Sentence, &cfg.hasher, 6).unwrap();
        assert_eq!(input.stream.len(), 6);
        assert_eq!(input.visible(), 2);
        let m = Summarizer::new(cfg).unwrap();
        let logits = m.unit_logits(&input);
        assert!(logits[0].is_finite() && logits[1].is_finite());
        assert_eq!(logits[2], f64::NEG_INFINITY);
    }

    #[test]
    fn all_zero_labels_push_probabilities_down() {
        let cfg = SummarizerConfig {
            epochs: 30,
            batch_size: 2,
            adam: AdamConfig {
                lr: 0.01,
                ..AdamConfig::default()
            },
            ..tiny(UnitKind::Segment, 9)
        };
        let docs = [
            doc(&["aa bb , cc dd", "ee ff"]),
            doc(&["gg , hh ii , jj"]),
            doc(&["kk ll mm , nn", "oo , pp"]),
        ];
        let cases: Vec<PreparedCase> = docs.iter().map(|d| prepared(d, UnitKind::Segment, |_| false, &cfg)).collect();
        let (m, log) = summarizer_train(&cases, &[], cfg).unwrap();
        assert!(log.epoch_losses.last().unwrap() < &log.epoch_losses[0]);
        let probs: Vec<f64> = cases.iter().flat_map(|c| m.unit_probabilities(&c.input)).collect();
        let mean = probs.iter().sum::<f64>() / probs.len() as f64;
        assert!(mean < 0.1, "mean p {mean}");
    }

    #[test]
    fn learns_marker_cue_and_keeps_best_dev() {
        let cfg = SummarizerConfig {
            epochs: 25,
            batch_size: 2,
            embed_dim: 8,
            hidden: 6,
            ff_dim: 16,
            adam: AdamConfig {
                lr: 0.01,
                ..AdamConfig::default()
            },
            selection: Selection::Threshold { probability: 0.5 },
            hasher: SubwordHasher::new(2, 3, 1024, 3).unwrap(),
            ..tiny(UnitKind::Segment, 3)
        };
        let words = ["aa", "bb", "cc", "dd", "ee", "ff", "gg", "hh"];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut make = |n: usize| -> Vec<PreparedCase> {
            (0..n)
                .map(|_| {
                    use rand::Rng;
                    let line: Vec<String> = (0..6)
                        .map(|_| {
                            let mut seg: Vec<&str> = (0..rng.random_range(1..4)).map(|_| words[rng.random_range(0..words.len())]).collect();
                            if rng.random_bool(0.4) {
                                seg.insert(rng.random_range(0..=seg.len()), "癌");
                            }
                            seg.join(" ")
                        })
                        .collect();
                    let d = doc(&[&line.join(" , ")]);
                    let units = segment_units(&d);
                    let labels = units.iter().map(|u| d.unit_text(u).contains('癌')).collect();
                    PreparedCase::new(&d, units, labels, "癌 。", &cfg).unwrap()
                })
                .collect()
        };
        let train = make(40);
        let test = make(20);
        let (m, log) = summarizer_train(&train, &test[..5], cfg).unwrap();
        assert_eq!(log.dev_scores.len(), 25);
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for c in &test {
            let chosen = m.select(&m.unit_logits(&c.input), &c.units);
            for (p, g) in chosen.iter().zip(&c.labels) {
                match (p, g) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fn_ += 1,
                    _ => {}
                }
            }
        }
        let f1 = 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64;
        assert!(f1 >= 0.9, "f1 {f1} {log:?}");
    }

    #[test]
    fn checkpoint_round_trip() {
        let cfg = tiny(UnitKind::Clause, 8);
        let m = Summarizer::new(cfg).unwrap();
        let bytes = m.to_checkpoint().to_bytes();
        let back = Summarizer::from_checkpoint(&Checkpoint::from_bytes(&bytes).unwrap()).unwrap();
        assert_eq!(back.config, m.config);
        assert_eq!(back.to_checkpoint().to_bytes(), bytes);
    }

    fn unit_of_len(i: usize, len: usize) -> Unit {
        Unit {
            sentence_index: i,
            unit_index: 0,
            kind: UnitKind::Segment,
            span: crate::corpus::TextSpan::new(0, len),
            tokens: 0..1,
            text_len: len,
        }
    }

    #[test]
    fn zero_budget_selects_one_unit() {
        let units: Vec<Unit> = (0..4).map(|i| unit_of_len(i, 7)).collect();
        let sel = select_units(&[0.1, 2.0, -1.0, 0.3], &units, Selection::Budget { chars: 0, rule: BudgetRule::KeepCrossing });
        assert_eq!(sel, vec![false, true, false, false]);
    }

    #[test]
    fn equal_scores_select_document_prefix() {
        let units: Vec<Unit> = (0..5).map(|i| unit_of_len(i, 10)).collect();
        let sel = select_units(&[0.0; 5], &units, Selection::Budget { chars: 25, rule: BudgetRule::KeepCrossing });
        assert_eq!(sel, vec![true, true, true, false, false]);
    }

    proptest! {
        #[test]
        fn ranking_invariant_under_monotone_transforms(
            logits in proptest::collection::vec(-5.0f64..5.0, 1..20),
            lens in proptest::collection::vec(1usize..40, 20),
            budget in 0usize..200,
            a in 0.1f64..4.0,
            b in -3.0f64..3.0,
        ) {
            let units: Vec<Unit> = (0..logits.len()).map(|i| unit_of_len(i, lens[i])).collect();
            let sel = Selection::Budget { chars: budget, rule: BudgetRule::KeepCrossing };
            let base = select_units(&logits, &units, sel);
            let affine: Vec<f64> = logits.iter().map(|l| a * l + b).collect();
            let cubed: Vec<f64> = logits.iter().map(|l| l.powi(3) + l).collect();
            let probs: Vec<f64> = logits.iter().map(|&l| sigmoid(l)).collect();
            prop_assert_eq!(&base, &select_units(&affine, &units, sel));
            prop_assert_eq!(&base, &select_units(&cubed, &units, sel));
            prop_assert_eq!(&base, &select_units(&probs, &units, sel));
        }

        #[test]
        fn overshoot_at_most_one_unit(
            logits in proptest::collection::vec(-5.0f64..5.0, 1..20),
            lens in proptest::collection::vec(1usize..40, 20),
            budget in 0usize..200,
        ) {
            let units: Vec<Unit> = (0..logits.len()).map(|i| unit_of_len(i, lens[i])).collect();
            let sel = select_units(&logits, &units, Selection::Budget { chars: budget, rule: BudgetRule::KeepCrossing });
            let total: usize = units.iter().zip(&sel).filter(|(_, s)| **s).map(|(u, _)| u.text_len).sum();
            let longest = units.iter().zip(&sel).filter(|(_, s)| **s).map(|(u, _)| u.text_len).max().unwrap_or(0);
            prop_assert!(total <= budget + longest);
        }
    }
}
