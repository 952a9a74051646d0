use super::layers::{acc_outer, LayerNorm, LayerNormCache, Linear};
use super::tensor::{dot, mat_vec_acc, vec_mat_acc};
use super::{ParameterStore, Tensor};
use crate::error::Result;

/// Numerically stable softmax over `scores[range]`; entries outside are zero.
pub fn masked_softmax(scores: &[f64], allowed: std::ops::Range<usize>) -> Vec<f64> {
    let mut p = vec![0.0; scores.len()];
    if allowed.is_empty() {
        return p;
    }
    let max = scores[allowed.clone()]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for i in allowed.clone() {
        p[i] = (scores[i] - max).exp();
        total += p[i];
    }
    for i in allowed {
        p[i] /= total;
    }
    p
}

/// Single-head scaled dot-product self-attention with an output projection.
#[derive(Debug, Clone)]
pub struct SelfAttention {
    wq: String,
    wk: String,
    wv: String,
    pub out: Linear,
    pub dim: usize,
}

pub struct AttentionCache {
    x: Tensor,
    q: Tensor,
    k: Tensor,
    v: Tensor,
    a: Tensor,
    c: Tensor,
}

impl SelfAttention {
    pub fn new(store: &mut ParameterStore, name: &str, dim: usize) -> Result<Self> {
        let att = SelfAttention {
            wq: format!("{name}.wq"),
            wk: format!("{name}.wk"),
            wv: format!("{name}.wv"),
            out: Linear::new(store, &format!("{name}.out"), dim, dim)?,
            dim,
        };
        store.add_glorot(&att.wq, dim, dim)?;
        store.add_glorot(&att.wk, dim, dim)?;
        store.add_glorot(&att.wv, dim, dim)?;
        Ok(att)
    }

    pub fn forward(&self, store: &ParameterStore, x: &Tensor) -> (Tensor, AttentionCache) {
        let q = x.matmul(store.value(&self.wq));
        let k = x.matmul(store.value(&self.wk));
        let v = x.matmul(store.value(&self.wv));
        let scale = 1.0 / (self.dim as f64).sqrt();
        let mut a = q.matmul_nt(&k);
        let n = a.rows();
        for r in 0..n {
            let row: Vec<f64> = a.row(r).iter().map(|s| s * scale).collect();
            a.row_mut(r).copy_from_slice(&masked_softmax(&row, 0..n));
        }
        let c = a.matmul(&v);
        let y = self.out.forward(store, &c);
        (
            y,
            AttentionCache {
                x: x.clone(),
                q,
                k,
                v,
                a,
                c,
            },
        )
    }

    pub fn backward(&self, store: &mut ParameterStore, cache: &AttentionCache, dy: &Tensor) -> Tensor {
        let dc = self.out.backward(store, &cache.c, dy);
        let da = dc.matmul_nt(&cache.v);
        let dv = cache.a.matmul_tn(&dc);
        let scale = 1.0 / (self.dim as f64).sqrt();
        let mut ds = da.clone();
        for r in 0..ds.rows() {
            let ar = cache.a.row(r);
            let inner = dot(da.row(r), ar);
            for (i, s) in ds.row_mut(r).iter_mut().enumerate() {
                *s = ar[i] * (da.row(r)[i] - inner) * scale;
            }
        }
        let dq = ds.matmul(&cache.k);
        let dk = ds.matmul_tn(&cache.q);
        store.grad_mut(&self.wq).add_assign(&cache.x.matmul_tn(&dq));
        store.grad_mut(&self.wk).add_assign(&cache.x.matmul_tn(&dk));
        store.grad_mut(&self.wv).add_assign(&cache.x.matmul_tn(&dv));
        let mut dx = dq.matmul_nt(store.value(&self.wq));
        dx.add_assign(&dk.matmul_nt(store.value(&self.wk)));
        dx.add_assign(&dv.matmul_nt(store.value(&self.wv)));
        dx
    }
}

/// Pre-norm transformer block: attention and a ReLU feed-forward, each on
/// a residual path.
#[derive(Debug, Clone)]
pub struct TransformerBlock {
    pub ln1: LayerNorm,
    pub attn: SelfAttention,
    pub ln2: LayerNorm,
    pub ff1: Linear,
    pub ff2: Linear,
}

pub struct BlockCache {
    ln1: LayerNormCache,
    attn: AttentionCache,
    ln2: LayerNormCache,
    h2: Tensor,
    pre: Tensor,
    act: Tensor,
}

impl TransformerBlock {
    pub fn new(store: &mut ParameterStore, name: &str, dim: usize, ff_dim: usize) -> Result<Self> {
        Ok(TransformerBlock {
            ln1: LayerNorm::new(store, &format!("{name}.ln1"), dim)?,
            attn: SelfAttention::new(store, &format!("{name}.attn"), dim)?,
            ln2: LayerNorm::new(store, &format!("{name}.ln2"), dim)?,
            ff1: Linear::new(store, &format!("{name}.ff1"), dim, ff_dim)?,
            ff2: Linear::new(store, &format!("{name}.ff2"), ff_dim, dim)?,
        })
    }

    pub fn forward(&self, store: &ParameterStore, x: &Tensor) -> (Tensor, BlockCache) {
        let (h1, ln1) = self.ln1.forward(store, x);
        let (a, attn) = self.attn.forward(store, &h1);
        let r1 = x.add(&a);
        let (h2, ln2) = self.ln2.forward(store, &r1);
        let pre = self.ff1.forward(store, &h2);
        let mut act = pre.clone();
        act.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
        let f = self.ff2.forward(store, &act);
        let r2 = r1.add(&f);
        (
            r2,
            BlockCache {
                ln1,
                attn,
                ln2,
                h2,
                pre,
                act,
            },
        )
    }

    pub fn backward(&self, store: &mut ParameterStore, cache: &BlockCache, dy: &Tensor) -> Tensor {
        let dact = self.ff2.backward(store, &cache.act, dy);
        let mut dpre = dact;
        for (d, p) in dpre.data_mut().iter_mut().zip(cache.pre.data()) {
            if *p <= 0.0 {
                *d = 0.0;
            }
        }
        let dh2 = self.ff1.backward(store, &cache.h2, &dpre);
        let mut dr1 = dy.clone();
        dr1.add_assign(&self.ln2.backward(store, &cache.ln2, &dh2));
        let dh1 = self.attn.backward(store, &cache.attn, &dr1);
        let mut dx = dr1;
        dx.add_assign(&self.ln1.backward(store, &cache.ln1, &dh1));
        dx
    }
}

/// A stack of blocks followed by a final layer norm.
#[derive(Debug, Clone)]
pub struct TransformerEncoder {
    pub blocks: Vec<TransformerBlock>,
    pub final_ln: LayerNorm,
}

pub struct EncoderCache {
    blocks: Vec<BlockCache>,
    final_ln: LayerNormCache,
}

impl TransformerEncoder {
    pub fn new(
        store: &mut ParameterStore,
        name: &str,
        layers: usize,
        dim: usize,
        ff_dim: usize,
    ) -> Result<Self> {
        let blocks = (0..layers)
            .map(|i| TransformerBlock::new(store, &format!("{name}.block{i}"), dim, ff_dim))
            .collect::<Result<_>>()?;
        Ok(TransformerEncoder {
            blocks,
            final_ln: LayerNorm::new(store, &format!("{name}.ln_f"), dim)?,
        })
    }

    pub fn forward(&self, store: &ParameterStore, x: &Tensor) -> (Tensor, EncoderCache) {
        let mut h = x.clone();
        let mut caches = Vec::with_capacity(self.blocks.len());
        for block in &self.blocks {
            let (next, c) = block.forward(store, &h);
            caches.push(c);
            h = next;
        }
        let (y, final_ln) = self.final_ln.forward(store, &h);
        (
            y,
            EncoderCache {
                blocks: caches,
                final_ln,
            },
        )
    }

    pub fn backward(&self, store: &mut ParameterStore, cache: &EncoderCache, dy: &Tensor) -> Tensor {
        let mut d = self.final_ln.backward(store, &cache.final_ln, dy);
        for (block, c) in self.blocks.iter().zip(&cache.blocks).rev() {
            d = block.backward(store, c, &d);
        }
        d
    }
}

/// Additive pointer scorer `u_j = v · tanh(W1 e_j + W2 d + b)`.
#[derive(Debug, Clone)]
pub struct PointerScorer {
    w1: String,
    w2: String,
    b: String,
    v: String,
    pub enc_dim: usize,
    pub dec_dim: usize,
    pub att_dim: usize,
}

/// Encoder-side projections, computed once per sentence.
pub struct PointerKeys {
    pub proj: Tensor,
}

pub struct PointerCache {
    d: Vec<f64>,
    tanh: Tensor,
    allowed: std::ops::Range<usize>,
}

impl PointerScorer {
    pub fn new(
        store: &mut ParameterStore,
        name: &str,
        enc_dim: usize,
        dec_dim: usize,
        att_dim: usize,
    ) -> Result<Self> {
        let p = PointerScorer {
            w1: format!("{name}.w1"),
            w2: format!("{name}.w2"),
            b: format!("{name}.b"),
            v: format!("{name}.v"),
            enc_dim,
            dec_dim,
            att_dim,
        };
        store.add_glorot(&p.w1, enc_dim, att_dim)?;
        store.add_glorot(&p.w2, dec_dim, att_dim)?;
        store.add_zeros(&p.b, &[att_dim])?;
        store.add_randn(&p.v, &[att_dim], (1.0 / att_dim as f64).sqrt())?;
        Ok(p)
    }

    pub fn keys(&self, store: &ParameterStore, enc: &Tensor) -> PointerKeys {
        PointerKeys {
            proj: enc.matmul(store.value(&self.w1)),
        }
    }

    /// Scores for every position; positions outside `allowed` are `-inf`.
    pub fn scores(
        &self,
        store: &ParameterStore,
        keys: &PointerKeys,
        d: &[f64],
        allowed: std::ops::Range<usize>,
    ) -> (Vec<f64>, PointerCache) {
        let n = keys.proj.rows();
        let mut query = store.value(&self.b).data().to_vec();
        vec_mat_acc(d, store.value(&self.w2), &mut query);
        let v = store.value(&self.v).data();
        let mut tanh = Tensor::zeros(&[n, self.att_dim]);
        let mut scores = vec![f64::NEG_INFINITY; n];
        for j in allowed.clone() {
            let row = tanh.row_mut(j);
            for (k, o) in row.iter_mut().enumerate() {
                *o = (keys.proj.row(j)[k] + query[k]).tanh();
            }
            scores[j] = dot(row, v);
        }
        (
            scores,
            PointerCache {
                d: d.to_vec(),
                tanh,
                allowed,
            },
        )
    }

    /// Backward from `dL/du`; returns `(dL/dproj rows, dL/dd)`. The caller
    /// folds the projection gradient through `keys_backward`.
    pub fn scores_backward(
        &self,
        store: &mut ParameterStore,
        cache: &PointerCache,
        du: &[f64],
        dproj: &mut Tensor,
    ) -> Vec<f64> {
        let v = store.value(&self.v).data().to_vec();
        let mut dquery = vec![0.0; self.att_dim];
        let mut dv = vec![0.0; self.att_dim];
        for j in cache.allowed.clone() {
            if du[j] == 0.0 {
                continue;
            }
            let t = cache.tanh.row(j);
            let drow = dproj.row_mut(j);
            for k in 0..self.att_dim {
                dv[k] += du[j] * t[k];
                let dpre = du[j] * v[k] * (1.0 - t[k] * t[k]);
                drow[k] += dpre;
                dquery[k] += dpre;
            }
        }
        for (a, b) in store.grad_mut(&self.v).data_mut().iter_mut().zip(&dv) {
            *a += b;
        }
        for (a, b) in store.grad_mut(&self.b).data_mut().iter_mut().zip(&dquery) {
            *a += b;
        }
        acc_outer(store, &self.w2, &cache.d, &dquery);
        let mut dd = vec![0.0; self.dec_dim];
        mat_vec_acc(store.value(&self.w2), &dquery, &mut dd);
        dd
    }

    /// Fold accumulated projection gradients into `W1`; returns `dL/denc`.
    pub fn keys_backward(&self, store: &mut ParameterStore, enc: &Tensor, dproj: &Tensor) -> Tensor {
        store.grad_mut(&self.w1).add_assign(&enc.matmul_tn(dproj));
        dproj.matmul_nt(store.value(&self.w1))
    }
}
