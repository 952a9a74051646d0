use super::attention::masked_softmax;
use super::layers::sigmoid;
use crate::error::{Error, Result};

/// Mean binary cross-entropy on logits and its gradient w.r.t. each logit.
pub fn sigmoid_bce(logits: &[f64], labels: &[f64]) -> Result<(f64, Vec<f64>)> {
    if logits.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} logits but {} labels",
            logits.len(),
            labels.len()
        )));
    }
    if logits.is_empty() {
        return Ok((0.0, Vec::new()));
    }
    let count = logits.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(logits.len());
    for (&x, &y) in logits.iter().zip(labels) {
        loss += x.max(0.0) - x * y + (-x.abs()).exp().ln_1p();
        grad.push((sigmoid(x) - y) / count);
    }
    Ok((loss / count, grad))
}

/// Cross-entropy of a softmax over `scores[allowed]` against `target`.
/// Returns the loss and `dL/dscores` (zero outside `allowed`).
pub fn masked_softmax_ce(
    scores: &[f64],
    allowed: std::ops::Range<usize>,
    target: usize,
) -> Result<(f64, Vec<f64>)> {
    if !allowed.contains(&target) {
        return Err(Error::Validation(format!(
            "target {target} outside allowed range {allowed:?}"
        )));
    }
    let p = masked_softmax(scores, allowed);
    let loss = -p[target].max(f64::MIN_POSITIVE).ln();
    let mut grad = p;
    grad[target] -= 1.0;
    Ok((loss, grad))
}
