//! A small deterministic neural kernel in double precision.
//!
//! There is no autodiff graph: each layer exposes `forward`, which returns a
//! cache, and `backward`, which consumes it and accumulates parameter
//! gradients into the [`ParameterStore`].

mod attention;
mod checkpoint;
mod gradcheck;
mod gru;
mod layers;
mod loss;
mod op_checks;
mod store;
mod tensor;
mod train;

pub use attention::{
    masked_softmax, AttentionCache, BlockCache, EncoderCache, PointerCache, PointerKeys,
    PointerScorer, SelfAttention, TransformerBlock, TransformerEncoder,
};
pub use checkpoint::{Checkpoint, NamedTensor, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use gradcheck::{check_gradients, relative_error, GradCheckReport, DEFAULT_STEP, RELATIVE_FLOOR};
pub use gru::{BiGru, BiGruCache, Gru, GruCache, GruStep};
pub use layers::{sigmoid, sinusoidal_positions, EmbeddingBag, LayerNorm, LayerNormCache, Linear, Vector};
pub use loss::{masked_softmax_ce, sigmoid_bce};
pub use op_checks::op_gradient_checks;
pub use store::{AdamConfig, Param, ParameterStore};
pub use tensor::{dot, Tensor};
pub use train::{train_step, Trainable};

/// Apply `transformer_block` semantics to `x` with one block and no final norm.
pub fn transformer_block(
    store: &ParameterStore,
    block: &TransformerBlock,
    x: &Tensor,
) -> crate::Result<Tensor> {
    if x.shape().len() != 2 || x.cols() != block.ln1.dim || x.rows() == 0 {
        return Err(crate::Error::Shape(format!(
            "transformer block of width {} got input {:?}",
            block.ln1.dim,
            x.shape()
        )));
    }
    Ok(block.forward(store, x).0)
}
