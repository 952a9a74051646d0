use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Tensor;
use crate::error::{Error, Result};

/// One trainable tensor with its gradient and Adam moments.
#[derive(Debug, Clone)]
pub struct Param {
    pub value: Tensor,
    pub grad: Tensor,
    pub m: Tensor,
    pub v: Tensor,
    /// Embedding tables only update the rows touched since the last step.
    row_sparse: bool,
    touched: BTreeSet<usize>,
}

impl Param {
    fn new(value: Tensor) -> Self {
        let shape = value.shape().to_vec();
        Param {
            grad: Tensor::zeros(&shape),
            m: Tensor::zeros(&shape),
            v: Tensor::zeros(&shape),
            value,
            row_sparse: false,
            touched: BTreeSet::new(),
        }
    }

    pub fn is_row_sparse(&self) -> bool {
        self.row_sparse
    }

    /// Add `g` to gradient row `row` and mark it touched.
    pub fn add_row_grad(&mut self, row: usize, g: &[f64], scale: f64) {
        for (a, b) in self.grad.row_mut(row).iter_mut().zip(g) {
            *a += scale * b;
        }
        self.touched.insert(row);
    }

    fn zero_grad(&mut self) {
        if self.row_sparse {
            let touched = std::mem::take(&mut self.touched);
            for r in touched {
                self.grad.row_mut(r).fill(0.0);
            }
        } else {
            self.grad.fill(0.0);
        }
    }

    /// Rows whose gradient may be non-zero.
    fn active_rows(&self) -> Vec<usize> {
        if self.row_sparse {
            self.touched.iter().copied().collect()
        } else {
            (0..self.value.rows()).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Rescale gradients whose global L2 norm exceeds this value.
    pub clip_norm: Option<f64>,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            clip_norm: Some(5.0),
        }
    }
}

/// Named parameters, seeded initialisation and the optimizer step counter.
#[derive(Debug, Clone)]
pub struct ParameterStore {
    params: BTreeMap<String, Param>,
    seed: u64,
    step: u64,
    init_rng: ChaCha8Rng,
}

impl ParameterStore {
    pub fn new(seed: u64) -> Self {
        ParameterStore {
            params: BTreeMap::new(),
            seed,
            step: 0,
            init_rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub(crate) fn set_step(&mut self, step: u64) {
        self.step = step;
    }

    pub fn add(&mut self, name: &str, value: Tensor) -> Result<()> {
        if self.params.contains_key(name) {
            return Err(Error::Validation(format!("parameter `{name}` registered twice")));
        }
        self.params.insert(name.to_string(), Param::new(value));
        Ok(())
    }

    pub fn add_randn(&mut self, name: &str, shape: &[usize], std: f64) -> Result<()> {
        let value = Tensor::randn(shape, std, &mut self.init_rng);
        self.add(name, value)
    }

    /// Glorot-normal init for a `[fan_in, fan_out]` matrix.
    pub fn add_glorot(&mut self, name: &str, fan_in: usize, fan_out: usize) -> Result<()> {
        let std = (2.0 / (fan_in + fan_out) as f64).sqrt();
        self.add_randn(name, &[fan_in, fan_out], std)
    }

    pub fn add_zeros(&mut self, name: &str, shape: &[usize]) -> Result<()> {
        self.add(name, Tensor::zeros(shape))
    }

    pub fn add_full(&mut self, name: &str, shape: &[usize], value: f64) -> Result<()> {
        self.add(name, Tensor::full(shape, value))
    }

    pub fn mark_row_sparse(&mut self, name: &str) {
        self.param_mut(name).row_sparse = true;
    }

    pub fn contains(&self, name: &str) -> bool {
        self.params.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.params.keys().map(String::as_str)
    }

    pub fn param(&self, name: &str) -> &Param {
        self.params
            .get(name)
            .unwrap_or_else(|| panic!("unknown parameter `{name}`"))
    }

    pub fn param_mut(&mut self, name: &str) -> &mut Param {
        self.params
            .get_mut(name)
            .unwrap_or_else(|| panic!("unknown parameter `{name}`"))
    }

    pub fn value(&self, name: &str) -> &Tensor {
        &self.param(name).value
    }

    pub fn value_mut(&mut self, name: &str) -> &mut Tensor {
        &mut self.param_mut(name).value
    }

    pub fn grad(&self, name: &str) -> &Tensor {
        &self.param(name).grad
    }

    pub fn grad_mut(&mut self, name: &str) -> &mut Tensor {
        &mut self.param_mut(name).grad
    }

    pub fn params(&self) -> impl Iterator<Item = (&str, &Param)> {
        self.params.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn parameter_count(&self) -> usize {
        self.params.values().map(|p| p.value.len()).sum()
    }

    pub fn zero_grad(&mut self) {
        self.params.values_mut().for_each(Param::zero_grad);
    }

    pub fn grad_norm(&self) -> f64 {
        let mut total = 0.0;
        for p in self.params.values() {
            for r in p.active_rows() {
                total += p.grad.row(r).iter().map(|g| g * g).sum::<f64>();
            }
        }
        total.sqrt()
    }

    /// One Adam update over all parameters, then clear gradients.
    ///
    /// Row-sparse tables update only touched rows (lazy Adam); their moment
    /// estimates for untouched rows are left as they were.
    pub fn adam_step(&mut self, config: &AdamConfig) -> Result<()> {
        let norm = self.grad_norm();
        if !norm.is_finite() {
            return Err(Error::NonFinite(format!(
                "gradient norm is {norm} at step {}",
                self.step
            )));
        }
        let scale = match config.clip_norm {
            Some(max) if norm > max => max / norm,
            _ => 1.0,
        };
        self.step += 1;
        let t = self.step as i32;
        let bias1 = 1.0 - config.beta1.powi(t);
        let bias2 = 1.0 - config.beta2.powi(t);
        for p in self.params.values_mut() {
            let cols = p.value.cols();
            for r in p.active_rows() {
                let range = r * cols..(r + 1) * cols;
                let grad = &p.grad.data()[range.clone()];
                let m = &mut p.m.data_mut()[range.clone()];
                for (m, g) in m.iter_mut().zip(grad) {
                    *m = config.beta1 * *m + (1.0 - config.beta1) * g * scale;
                }
                let v = &mut p.v.data_mut()[range.clone()];
                for (v, g) in v.iter_mut().zip(grad) {
                    let g = g * scale;
                    *v = config.beta2 * *v + (1.0 - config.beta2) * g * g;
                }
                let (m, v) = (&p.m.data()[range.clone()], &p.v.data()[range.clone()]);
                let updates: Vec<f64> = m
                    .iter()
                    .zip(v)
                    .map(|(m, v)| config.lr * (m / bias1) / ((v / bias2).sqrt() + config.eps))
                    .collect();
                for (w, u) in p.value.data_mut()[range].iter_mut().zip(updates) {
                    *w -= u;
                }
            }
        }
        self.zero_grad();
        Ok(())
    }
}
