use super::layers::{acc_outer, sigmoid};
use super::tensor::{mat_vec_acc, vec_mat_acc};
use super::{ParameterStore, Tensor};
use crate::error::Result;

/// Gated recurrent unit with PyTorch gate ordering `[r, z, n]`:
///
/// ```text
/// r  = σ(x Wx_r + bx_r + h Wh_r + bh_r)
/// z  = σ(x Wx_z + bx_z + h Wh_z + bh_z)
/// n  = tanh(x Wx_n + bx_n + r ⊙ (h Wh_n + bh_n))
/// h' = (1 - z) ⊙ n + z ⊙ h
/// ```
#[derive(Debug, Clone)]
pub struct Gru {
    wx: String,
    wh: String,
    bx: String,
    bh: String,
    pub input: usize,
    pub hidden: usize,
}

/// Everything the backward pass needs from one step.
#[derive(Debug, Clone)]
pub struct GruStep {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    r: Vec<f64>,
    z: Vec<f64>,
    n: Vec<f64>,
    hn: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GruCache {
    steps: Vec<GruStep>,
}

impl Gru {
    pub fn new(store: &mut ParameterStore, name: &str, input: usize, hidden: usize) -> Result<Self> {
        let g = Gru {
            wx: format!("{name}.wx"),
            wh: format!("{name}.wh"),
            bx: format!("{name}.bx"),
            bh: format!("{name}.bh"),
            input,
            hidden,
        };
        store.add_glorot(&g.wx, input, 3 * hidden)?;
        store.add_glorot(&g.wh, hidden, 3 * hidden)?;
        store.add_zeros(&g.bx, &[3 * hidden])?;
        store.add_zeros(&g.bh, &[3 * hidden])?;
        Ok(g)
    }

    pub fn step(&self, store: &ParameterStore, x: &[f64], h: &[f64]) -> (Vec<f64>, GruStep) {
        let hd = self.hidden;
        let mut gx = store.value(&self.bx).data().to_vec();
        vec_mat_acc(x, store.value(&self.wx), &mut gx);
        let mut gh = store.value(&self.bh).data().to_vec();
        vec_mat_acc(h, store.value(&self.wh), &mut gh);
        let mut r = vec![0.0; hd];
        let mut z = vec![0.0; hd];
        let mut n = vec![0.0; hd];
        let mut out = vec![0.0; hd];
        for i in 0..hd {
            r[i] = sigmoid(gx[i] + gh[i]);
            z[i] = sigmoid(gx[hd + i] + gh[hd + i]);
            n[i] = (gx[2 * hd + i] + r[i] * gh[2 * hd + i]).tanh();
            out[i] = (1.0 - z[i]) * n[i] + z[i] * h[i];
        }
        let hn = gh[2 * hd..].to_vec();
        let cache = GruStep {
            x: x.to_vec(),
            h_prev: h.to_vec(),
            r,
            z,
            n,
            hn,
        };
        (out, cache)
    }

    /// Backward through one step; returns `(dx, dh_prev)`.
    pub fn step_backward(
        &self,
        store: &mut ParameterStore,
        c: &GruStep,
        dh_out: &[f64],
    ) -> (Vec<f64>, Vec<f64>) {
        let hd = self.hidden;
        let mut dgx = vec![0.0; 3 * hd];
        let mut dgh = vec![0.0; 3 * hd];
        let mut dh_prev = vec![0.0; hd];
        for i in 0..hd {
            let dn = dh_out[i] * (1.0 - c.z[i]);
            let dz = dh_out[i] * (c.h_prev[i] - c.n[i]);
            dh_prev[i] = dh_out[i] * c.z[i];
            let dn_pre = dn * (1.0 - c.n[i] * c.n[i]);
            let dr = dn_pre * c.hn[i];
            let dr_pre = dr * c.r[i] * (1.0 - c.r[i]);
            let dz_pre = dz * c.z[i] * (1.0 - c.z[i]);
            dgx[i] = dr_pre;
            dgx[hd + i] = dz_pre;
            dgx[2 * hd + i] = dn_pre;
            dgh[i] = dr_pre;
            dgh[hd + i] = dz_pre;
            dgh[2 * hd + i] = dn_pre * c.r[i];
        }
        acc_outer(store, &self.wx, &c.x, &dgx);
        acc_outer(store, &self.wh, &c.h_prev, &dgh);
        for (a, b) in store.grad_mut(&self.bx).data_mut().iter_mut().zip(&dgx) {
            *a += b;
        }
        for (a, b) in store.grad_mut(&self.bh).data_mut().iter_mut().zip(&dgh) {
            *a += b;
        }
        let mut dx = vec![0.0; self.input];
        mat_vec_acc(store.value(&self.wx), &dgx, &mut dx);
        mat_vec_acc(store.value(&self.wh), &dgh, &mut dh_prev);
        (dx, dh_prev)
    }

    /// Run over the rows of `x` (`[T, input]`), returning `[T, hidden]`.
    pub fn forward_seq(&self, store: &ParameterStore, x: &Tensor, h0: &[f64]) -> (Tensor, GruCache) {
        let t = x.rows();
        let mut out = Tensor::zeros(&[t, self.hidden]);
        let mut steps = Vec::with_capacity(t);
        let mut h = h0.to_vec();
        for i in 0..t {
            let (next, c) = self.step(store, x.row(i), &h);
            out.row_mut(i).copy_from_slice(&next);
            steps.push(c);
            h = next;
        }
        (out, GruCache { steps })
    }

    /// Backward through a sequence given `dL/dh_t` for every output row.
    /// Returns `(dx, dh0)`.
    pub fn backward_seq(
        &self,
        store: &mut ParameterStore,
        cache: &GruCache,
        d_out: &Tensor,
    ) -> (Tensor, Vec<f64>) {
        let t = cache.steps.len();
        let mut dx = Tensor::zeros(&[t, self.input]);
        let mut carry = vec![0.0; self.hidden];
        for i in (0..t).rev() {
            let dh: Vec<f64> = carry.iter().zip(d_out.row(i)).map(|(a, b)| a + b).collect();
            let (dxi, dprev) = self.step_backward(store, &cache.steps[i], &dh);
            dx.row_mut(i).copy_from_slice(&dxi);
            carry = dprev;
        }
        (dx, carry)
    }
}

/// Forward and backward GRUs; output row `t` is `[fwd_t ; bwd_t]`.
#[derive(Debug, Clone)]
pub struct BiGru {
    pub fwd: Gru,
    pub bwd: Gru,
}

pub struct BiGruCache {
    fwd: GruCache,
    bwd: GruCache,
}

fn reversed(x: &Tensor) -> Tensor {
    let rows: Vec<&[f64]> = (0..x.rows()).rev().map(|i| x.row(i)).collect();
    Tensor::from_rows(&rows, x.cols())
}

impl BiGru {
    pub fn new(store: &mut ParameterStore, name: &str, input: usize, hidden: usize) -> Result<Self> {
        Ok(BiGru {
            fwd: Gru::new(store, &format!("{name}.fwd"), input, hidden)?,
            bwd: Gru::new(store, &format!("{name}.bwd"), input, hidden)?,
        })
    }

    pub fn output_dim(&self) -> usize {
        2 * self.fwd.hidden
    }

    pub fn forward(&self, store: &ParameterStore, x: &Tensor) -> (Tensor, BiGruCache) {
        let hd = self.fwd.hidden;
        let zero = vec![0.0; hd];
        let (f, fc) = self.fwd.forward_seq(store, x, &zero);
        let (b_rev, bc) = self.bwd.forward_seq(store, &reversed(x), &zero);
        let t = x.rows();
        let mut out = Tensor::zeros(&[t, 2 * hd]);
        for i in 0..t {
            let row = out.row_mut(i);
            row[..hd].copy_from_slice(f.row(i));
            row[hd..].copy_from_slice(b_rev.row(t - 1 - i));
        }
        (out, BiGruCache { fwd: fc, bwd: bc })
    }

    pub fn backward(&self, store: &mut ParameterStore, cache: &BiGruCache, d_out: &Tensor) -> Tensor {
        let hd = self.fwd.hidden;
        let t = d_out.rows();
        let mut df = Tensor::zeros(&[t, hd]);
        let mut db = Tensor::zeros(&[t, hd]);
        for i in 0..t {
            df.row_mut(i).copy_from_slice(&d_out.row(i)[..hd]);
            db.row_mut(t - 1 - i).copy_from_slice(&d_out.row(i)[hd..]);
        }
        let (mut dx, _) = self.fwd.backward_seq(store, &cache.fwd, &df);
        let (dx_rev, _) = self.bwd.backward_seq(store, &cache.bwd, &db);
        for i in 0..t {
            for (a, b) in dx.row_mut(i).iter_mut().zip(dx_rev.row(t - 1 - i)) {
                *a += b;
            }
        }
        dx
    }
}
