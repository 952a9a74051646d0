use super::tensor::{dot, outer_acc};
use super::{ParameterStore, Tensor};
use crate::error::Result;

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Affine map `y = x W + b` over the rows of `x`.
#[derive(Debug, Clone)]
pub struct Linear {
    w: String,
    b: String,
    pub input: usize,
    pub output: usize,
}

impl Linear {
    pub fn new(store: &mut ParameterStore, name: &str, input: usize, output: usize) -> Result<Self> {
        let w = format!("{name}.w");
        let b = format!("{name}.b");
        store.add_glorot(&w, input, output)?;
        store.add_zeros(&b, &[output])?;
        Ok(Linear {
            w,
            b,
            input,
            output,
        })
    }

    pub fn weight_name(&self) -> &str {
        &self.w
    }

    pub fn bias_name(&self) -> &str {
        &self.b
    }

    pub fn forward(&self, store: &ParameterStore, x: &Tensor) -> Tensor {
        let mut y = x.matmul(store.value(&self.w));
        let b = store.value(&self.b).data();
        for r in 0..y.rows() {
            for (v, bb) in y.row_mut(r).iter_mut().zip(b) {
                *v += bb;
            }
        }
        y
    }

    /// Accumulate parameter gradients and return `dL/dx`.
    pub fn backward(&self, store: &mut ParameterStore, x: &Tensor, dy: &Tensor) -> Tensor {
        let dx = dy.matmul_nt(store.value(&self.w));
        let dw = x.matmul_tn(dy);
        store.grad_mut(&self.w).add_assign(&dw);
        let db = store.grad_mut(&self.b).data_mut();
        for r in 0..dy.rows() {
            for (g, d) in db.iter_mut().zip(dy.row(r)) {
                *g += d;
            }
        }
        dx
    }
}

#[derive(Debug, Clone)]
pub struct LayerNorm {
    gain: String,
    bias: String,
    pub dim: usize,
    pub eps: f64,
}

pub struct LayerNormCache {
    xhat: Tensor,
    inv_std: Vec<f64>,
}

impl LayerNorm {
    pub fn new(store: &mut ParameterStore, name: &str, dim: usize) -> Result<Self> {
        let gain = format!("{name}.gain");
        let bias = format!("{name}.bias");
        store.add_full(&gain, &[dim], 1.0)?;
        store.add_zeros(&bias, &[dim])?;
        Ok(LayerNorm {
            gain,
            bias,
            dim,
            eps: 1e-5,
        })
    }

    pub fn forward(&self, store: &ParameterStore, x: &Tensor) -> (Tensor, LayerNormCache) {
        let g = store.value(&self.gain).data();
        let b = store.value(&self.bias).data();
        let d = self.dim as f64;
        let mut xhat = x.clone();
        let mut y = x.clone();
        let mut inv_std = Vec::with_capacity(x.rows());
        for r in 0..x.rows() {
            let row = x.row(r);
            let mean = row.iter().sum::<f64>() / d;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d;
            let is = 1.0 / (var + self.eps).sqrt();
            inv_std.push(is);
            for (i, h) in xhat.row_mut(r).iter_mut().enumerate() {
                *h = (row[i] - mean) * is;
            }
            let hr = xhat.row(r).to_vec();
            for (i, o) in y.row_mut(r).iter_mut().enumerate() {
                *o = g[i] * hr[i] + b[i];
            }
        }
        (y, LayerNormCache { xhat, inv_std })
    }

    pub fn backward(&self, store: &mut ParameterStore, cache: &LayerNormCache, dy: &Tensor) -> Tensor {
        let g = store.value(&self.gain).data().to_vec();
        let d = self.dim as f64;
        let mut dx = dy.clone();
        let mut dg = vec![0.0; self.dim];
        let mut db = vec![0.0; self.dim];
        for r in 0..dy.rows() {
            let xh = cache.xhat.row(r);
            let dyr = dy.row(r);
            let dxhat: Vec<f64> = dyr.iter().zip(&g).map(|(a, b)| a * b).collect();
            let mean_d = dxhat.iter().sum::<f64>() / d;
            let mean_dx = dot(&dxhat, xh) / d;
            for (i, o) in dx.row_mut(r).iter_mut().enumerate() {
                *o = cache.inv_std[r] * (dxhat[i] - mean_d - xh[i] * mean_dx);
                dg[i] += dyr[i] * xh[i];
                db[i] += dyr[i];
            }
        }
        for (a, b) in store.grad_mut(&self.gain).data_mut().iter_mut().zip(dg) {
            *a += b;
        }
        for (a, b) in store.grad_mut(&self.bias).data_mut().iter_mut().zip(db) {
            *a += b;
        }
        dx
    }
}

/// Mean of hashed sub-word bucket vectors per token.
#[derive(Debug, Clone)]
pub struct EmbeddingBag {
    table: String,
    pub buckets: usize,
    pub dim: usize,
}

impl EmbeddingBag {
    pub fn new(store: &mut ParameterStore, name: &str, buckets: usize, dim: usize) -> Result<Self> {
        let table = format!("{name}.table");
        store.add_randn(&table, &[buckets, dim], 0.1)?;
        store.mark_row_sparse(&table);
        Ok(EmbeddingBag {
            table,
            buckets,
            dim,
        })
    }

    pub fn table_name(&self) -> &str {
        &self.table
    }

    pub fn embed(&self, store: &ParameterStore, ids: &[usize]) -> Vec<f64> {
        let table = store.value(&self.table);
        let mut out = vec![0.0; self.dim];
        if ids.is_empty() {
            return out;
        }
        for &id in ids {
            for (o, v) in out.iter_mut().zip(table.row(id)) {
                *o += v;
            }
        }
        let inv = 1.0 / ids.len() as f64;
        out.iter_mut().for_each(|o| *o *= inv);
        out
    }

    pub fn backward(&self, store: &mut ParameterStore, ids: &[usize], d_out: &[f64]) {
        if ids.is_empty() {
            return;
        }
        let inv = 1.0 / ids.len() as f64;
        let param = store.param_mut(&self.table);
        for &id in ids {
            param.add_row_grad(id, d_out, inv);
        }
    }
}

/// A learned free vector (used for special tokens).
#[derive(Debug, Clone)]
pub struct Vector {
    name: String,
    pub dim: usize,
}

impl Vector {
    pub fn new(store: &mut ParameterStore, name: &str, dim: usize) -> Result<Self> {
        store.add_randn(name, &[dim], 0.1)?;
        Ok(Vector {
            name: name.to_string(),
            dim,
        })
    }

    pub fn value<'a>(&self, store: &'a ParameterStore) -> &'a [f64] {
        store.value(&self.name).data()
    }

    pub fn backward(&self, store: &mut ParameterStore, d: &[f64]) {
        for (a, b) in store.grad_mut(&self.name).data_mut().iter_mut().zip(d) {
            *a += b;
        }
    }
}

/// Accumulate `x^T dy` into a named matrix gradient.
pub(crate) fn acc_outer(store: &mut ParameterStore, name: &str, x: &[f64], dy: &[f64]) {
    outer_acc(store.grad_mut(name), x, dy);
}

/// Fixed sinusoidal position table `[len, dim]`.
pub fn sinusoidal_positions(len: usize, dim: usize) -> Tensor {
    let mut t = Tensor::zeros(&[len, dim]);
    for pos in 0..len {
        let row = t.row_mut(pos);
        for i in 0..dim {
            let rate = 1.0 / 10000f64.powf((2 * (i / 2)) as f64 / dim as f64);
            let angle = pos as f64 * rate;
            row[i] = if i % 2 == 0 { angle.sin() } else { angle.cos() };
        }
    }
    t
}
