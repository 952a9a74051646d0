use super::{AdamConfig, ParameterStore};
use crate::error::{Error, Result};

/// A model whose gradients can be accumulated one example at a time.
pub trait Trainable {
    type Example;

    fn store(&self) -> &ParameterStore;
    fn store_mut(&mut self) -> &mut ParameterStore;

    /// Add `scale * dL/dθ` for one example to the store; return the loss.
    fn accumulate(&mut self, example: &Self::Example, scale: f64) -> Result<f64>;
}

/// One optimizer step on the mean loss of `batch`. Returns that loss.
pub fn train_step<M: Trainable>(model: &mut M, batch: &[M::Example], config: &AdamConfig) -> Result<f64> {
    if batch.is_empty() {
        return Ok(0.0);
    }
    let scale = 1.0 / batch.len() as f64;
    let mut total = 0.0;
    for (i, example) in batch.iter().enumerate() {
        let loss = model.accumulate(example, scale)?;
        if !loss.is_finite() {
            model.store_mut().zero_grad();
            return Err(Error::NonFinite(format!(
                "loss {loss} on batch item {i} at step {}",
                model.store().step()
            )));
        }
        total += loss;
    }
    model.store_mut().adam_step(config)?;
    Ok(total * scale)
}
