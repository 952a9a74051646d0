//! Learned boundary detector: encode, decode, point.
//!
//! Tokens are embedded from hashed character n-grams and encoded by a
//! bidirectional GRU. A GRU decoder starts from the concatenated final
//! forward and first backward states; at each step it reads the encoder
//! vector at the current unit start and points at the unit's last token,
//! with attention restricted to `[start, n)`. Pointing at the final token
//! ends decoding without adding a boundary.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{
    masked_softmax_ce, train_step, AdamConfig, BiGru, Checkpoint, EmbeddingBag, Gru, GruStep,
    ParameterStore, PointerScorer, Tensor, Trainable,
};
use crate::splitters::BoundarySet;
use crate::tokenize::{embed_token_id, SubwordHasher, Token};

pub const SEGMENTER_KIND: &str = "pointer-segmenter";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmenterConfig {
    pub hasher: SubwordHasher,
    pub embed_dim: usize,
    pub hidden: usize,
    pub attention_dim: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// Longer training sentences are skipped.
    pub max_train_tokens: usize,
    pub seed: u64,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        SegmenterConfig {
            hasher: SubwordHasher::default(),
            embed_dim: 32,
            hidden: 32,
            attention_dim: 32,
            epochs: 6,
            batch_size: 16,
            adam: AdamConfig {
                lr: 3e-3,
                ..AdamConfig::default()
            },
            max_train_tokens: 128,
            seed: 7,
        }
    }
}

impl SegmenterConfig {
    pub fn validate(&self) -> Result<()> {
        self.hasher.validate()?;
        if self.embed_dim == 0 || self.hidden == 0 || self.attention_dim == 0 {
            return Err(Error::Validation("segmenter dimensions must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Validation("batch_size must be positive".into()));
        }
        Ok(())
    }
}

/// A training sentence: bucket ids per token and the gold boundaries.
#[derive(Debug, Clone)]
pub struct SegmenterExample {
    pub ids: Vec<Vec<usize>>,
    pub gold: BoundarySet,
}

impl SegmenterExample {
    pub fn new(tokens: &[Token], gold: BoundarySet, hasher: &SubwordHasher) -> Result<Self> {
        if !gold.is_valid_for(tokens.len()) || tokens.is_empty() {
            return Err(Error::Validation(format!(
                "gold boundaries {:?} invalid for a {}-token sentence",
                gold.positions(),
                tokens.len()
            )));
        }
        Ok(SegmenterExample {
            ids: tokens.iter().map(|t| embed_token_id(t, hasher)).collect(),
            gold,
        })
    }

    /// Pointer targets: every boundary, then the final token.
    fn targets(&self) -> Vec<usize> {
        let mut t = self.gold.positions().to_vec();
        t.push(self.ids.len() - 1);
        t
    }
}

#[derive(Debug, Clone)]
pub struct PointerSegmenter {
    pub config: SegmenterConfig,
    store: ParameterStore,
    embed: EmbeddingBag,
    encoder: BiGru,
    decoder: Gru,
    pointer: PointerScorer,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SegmenterTrainLog {
    pub epoch_losses: Vec<f64>,
    pub skipped_long: usize,
}

impl PointerSegmenter {
    pub fn new(config: SegmenterConfig) -> Result<Self> {
        config.validate()?;
        let mut store = ParameterStore::new(config.seed);
        let embed = EmbeddingBag::new(&mut store, "seg.embed", config.hasher.bucket_count, config.embed_dim)?;
        let encoder = BiGru::new(&mut store, "seg.enc", config.embed_dim, config.hidden)?;
        let enc_dim = encoder.output_dim();
        let decoder = Gru::new(&mut store, "seg.dec", enc_dim, enc_dim)?;
        let pointer = PointerScorer::new(&mut store, "seg.ptr", enc_dim, enc_dim, config.attention_dim)?;
        Ok(PointerSegmenter {
            config,
            store,
            embed,
            encoder,
            decoder,
            pointer,
        })
    }

    pub fn store(&self) -> &ParameterStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ParameterStore {
        &mut self.store
    }

    fn embed_rows(&self, ids: &[Vec<usize>]) -> Tensor {
        let d = self.config.embed_dim;
        let rows: Vec<Vec<f64>> = ids.iter().map(|t| self.embed.embed(&self.store, t)).collect();
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        Tensor::from_rows(&refs, d)
    }

    fn initial_state(&self, enc: &Tensor) -> Vec<f64> {
        let h = self.config.hidden;
        let n = enc.rows();
        let mut d0 = enc.row(n - 1)[..h].to_vec();
        d0.extend_from_slice(&enc.row(0)[h..]);
        d0
    }

    /// Greedy decoding over bucket ids; returns internal boundary positions.
    pub fn predict_ids(&self, ids: &[Vec<usize>]) -> Vec<usize> {
        let n = ids.len();
        if n <= 1 {
            return Vec::new();
        }
        let (enc, _) = self.encoder.forward(&self.store, &self.embed_rows(ids));
        let keys = self.pointer.keys(&self.store, &enc);
        let mut d = self.initial_state(&enc);
        let mut start = 0;
        let mut out = Vec::new();
        while start < n {
            let (next, _) = self.decoder.step(&self.store, enc.row(start), &d);
            d = next;
            let (scores, _) = self.pointer.scores(&self.store, &keys, &d, start..n);
            let mut end = start;
            for j in start..n {
                if scores[j] > scores[end] {
                    end = j;
                }
            }
            if end + 1 >= n {
                break;
            }
            out.push(end);
            start = end + 1;
        }
        out
    }

    pub fn predict(&self, sentence_index: usize, tokens: &[Token]) -> BoundarySet {
        let ids: Vec<Vec<usize>> = tokens
            .iter()
            .map(|t| embed_token_id(t, &self.config.hasher))
            .collect();
        BoundarySet::from_candidates(sentence_index, self.predict_ids(&ids), tokens.len())
    }

    /// Teacher-forced mean cross-entropy over pointer steps; accumulates
    /// `scale` times its gradient.
    pub fn loss_and_grad(&mut self, example: &SegmenterExample, scale: f64) -> Result<f64> {
        let n = example.ids.len();
        let x = self.embed_rows(&example.ids);
        let (enc, enc_cache) = self.encoder.forward(&self.store, &x);
        let keys = self.pointer.keys(&self.store, &enc);
        let targets = example.targets();
        let steps = targets.len() as f64;

        let mut d = self.initial_state(&enc);
        let mut start = 0;
        let mut loss = 0.0;
        let mut trace: Vec<(usize, GruStep, Vec<f64>)> = Vec::with_capacity(targets.len());
        let mut dproj = Tensor::zeros(keys.proj.shape());
        let mut pointer_caches = Vec::with_capacity(targets.len());
        for &target in &targets {
            let (next, step_cache) = self.decoder.step(&self.store, enc.row(start), &d);
            d = next;
            let (scores, pc) = self.pointer.scores(&self.store, &keys, &d, start..n);
            let (l, du) = masked_softmax_ce(&scores, start..n, target)?;
            loss += l;
            let du: Vec<f64> = du.iter().map(|g| g * scale / steps).collect();
            pointer_caches.push(pc);
            trace.push((start, step_cache, du));
            start = target + 1;
        }

        let mut denc = Tensor::zeros(enc.shape());
        let mut carry = vec![0.0; d.len()];
        for ((start, step_cache, du), pc) in trace.iter().zip(&pointer_caches).rev() {
            let dd = self.pointer.scores_backward(&mut self.store, pc, du, &mut dproj);
            let dh: Vec<f64> = carry.iter().zip(&dd).map(|(a, b)| a + b).collect();
            let (dx, dprev) = self.decoder.step_backward(&mut self.store, step_cache, &dh);
            for (a, b) in denc.row_mut(*start).iter_mut().zip(&dx) {
                *a += b;
            }
            carry = dprev;
        }
        let h = self.config.hidden;
        for (a, b) in denc.row_mut(n - 1)[..h].iter_mut().zip(&carry[..h]) {
            *a += b;
        }
        for (a, b) in denc.row_mut(0)[h..].iter_mut().zip(&carry[h..]) {
            *a += b;
        }
        denc.add_assign(&self.pointer.keys_backward(&mut self.store, &enc, &dproj));
        let dx = self.encoder.backward(&mut self.store, &enc_cache, &denc);
        for (i, ids) in example.ids.iter().enumerate() {
            self.embed.backward(&mut self.store, ids, dx.row(i));
        }
        Ok(loss / steps)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let hp = serde_json::to_value(&self.config).expect("config serializes");
        Checkpoint::from_store(&self.store, SEGMENTER_KIND, hp, false)
    }

    pub fn from_checkpoint(checkpoint: &Checkpoint) -> Result<Self> {
        checkpoint.expect_kind(SEGMENTER_KIND)?;
        let config: SegmenterConfig = serde_json::from_value(checkpoint.hyperparameters.clone())
            .map_err(|e| Error::Checkpoint(format!("bad segmenter hyperparameters: {e}")))?;
        let mut model = PointerSegmenter::new(config)?;
        checkpoint.restore_into(&mut model.store)?;
        Ok(model)
    }
}

impl Trainable for PointerSegmenter {
    type Example = SegmenterExample;

    fn store(&self) -> &ParameterStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParameterStore {
        &mut self.store
    }

    fn accumulate(&mut self, example: &SegmenterExample, scale: f64) -> Result<f64> {
        self.loss_and_grad(example, scale)
    }
}

/// Train from scratch on `(tokens, gold)` pairs.
pub fn segmenter_train(
    data: &[(Vec<Token>, BoundarySet)],
    config: SegmenterConfig,
) -> Result<(PointerSegmenter, SegmenterTrainLog)> {
    if data.is_empty() {
        return Err(Error::Validation("segmenter training set is empty".into()));
    }
    let mut log = SegmenterTrainLog::default();
    let mut examples = Vec::with_capacity(data.len());
    for (tokens, gold) in data {
        if tokens.len() > config.max_train_tokens {
            log.skipped_long += 1;
            continue;
        }
        examples.push(SegmenterExample::new(tokens, gold.clone(), &config.hasher)?);
    }
    if examples.is_empty() {
        return Err(Error::Validation(format!(
            "every training sentence exceeds max_train_tokens = {}",
            config.max_train_tokens
        )));
    }
    let mut model = PointerSegmenter::new(config.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5e6_5e6);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut batches = 0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<SegmenterExample> = chunk.iter().map(|&i| examples[i].clone()).collect();
            total += train_step(&mut model, &batch, &config.adam)?;
            batches += 1;
        }
        log.epoch_losses.push(total / batches as f64);
    }
    Ok((model, log))
}

/// How examples are grouped into cross-validation folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoldLevel {
    #[default]
    Document,
    Sentence,
}

/// Assign every example to one of `k` folds. Document-level folds keep all
/// sentences of a document together.
pub fn assign_folds(document_ids: &[&str], k: usize, level: FoldLevel, seed: u64) -> Vec<usize> {
    assert!(k >= 1, "need at least one fold");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match level {
        FoldLevel::Sentence => {
            let mut order: Vec<usize> = (0..document_ids.len()).collect();
            order.shuffle(&mut rng);
            let mut fold = vec![0; document_ids.len()];
            for (rank, i) in order.into_iter().enumerate() {
                fold[i] = rank % k;
            }
            fold
        }
        FoldLevel::Document => {
            let mut docs: Vec<&str> = document_ids.to_vec();
            docs.sort_unstable();
            docs.dedup();
            docs.shuffle(&mut rng);
            let of: std::collections::HashMap<&str, usize> =
                docs.iter().enumerate().map(|(r, d)| (*d, r % k)).collect();
            document_ids.iter().map(|d| of[d]).collect()
        }
    }
}
