//! Finite-difference checks for every differentiable operation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;

/// `L = sum(out * r)` for a fixed random `r`, so `dL/dout = r`.
fn projection(out: &Tensor, r: &Tensor) -> f64 {
    dot(out.data(), r.data())
}

fn add_input_grad(store: &mut ParameterStore, name: &str, dx: &Tensor) {
    store.grad_mut(name).add_assign(dx);
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Run the gradient check of each layer, loss and embedding on small
/// random inputs. Input gradients are checked alongside parameters by
/// registering the inputs as parameters.
pub fn op_gradient_checks() -> Vec<(&'static str, GradCheckReport)> {
    vec![
        ("linear", linear_gradients()),
        ("layer_norm", layer_norm_gradients()),
        ("gru", gru_sequence_gradients()),
        ("bigru", bigru_gradients()),
        ("self_attention", attention_gradients()),
        ("transformer_encoder", transformer_encoder_gradients()),
        ("pointer_softmax_ce", pointer_cross_entropy_gradients()),
        ("embedding_bag", embedding_bag_gradients()),
        ("sigmoid_bce", bce_gradients_tight()),
    ]
}

fn linear_gradients() -> GradCheckReport {
    let mut s = ParameterStore::new(1);
    let lin = Linear::new(&mut s, "l", 3, 2).expect("valid shapes");
    s.add_randn("x", &[4, 3], 1.0).expect("valid shapes");
    let r = Tensor::randn(&[4, 2], 1.0, &mut rng(2));
    check_gradients(
        &mut s,
        |s| {
            let x = s.value("x").clone();
            let y = lin.forward(s, &x);
            let dx = lin.backward(s, &x, &r);
            add_input_grad(s, "x", &dx);
            projection(&y, &r)
        },
        DEFAULT_STEP,
        50,
    )
}

fn layer_norm_gradients() -> GradCheckReport {
    let mut s = ParameterStore::new(3);
    let ln = LayerNorm::new(&mut s, "ln", 5).expect("valid shapes");
    s.add_randn("x", &[3, 5], 1.0).expect("valid shapes");
    s.value_mut("ln.gain").data_mut()[1] = 0.4;
    let r = Tensor::randn(&[3, 5], 1.0, &mut rng(4));
    check_gradients(
        &mut s,
        |s| {
            let x = s.value("x").clone();
            let (y, c) = ln.forward(s, &x);
            let dx = ln.backward(s, &c, &r);
            add_input_grad(s, "x", &dx);
            projection(&y, &r)
        },
        DEFAULT_STEP,
        50,
    )
}

fn gru_sequence_gradients() -> GradCheckReport {
    let mut s = ParameterStore::new(5);
    let g = Gru::new(&mut s, "g", 3, 4).expect("valid shapes");
    s.add_randn("x", &[5, 3], 1.0).expect("valid shapes");
    s.add_randn("h0", &[4], 0.5).expect("valid shapes");
    for b in ["g.bx", "g.bh"] {
        let t = Tensor::randn(&[12], 0.3, &mut rng(6));
        *s.value_mut(b) = t;
    }
    let r = Tensor::randn(&[5, 4], 1.0, &mut rng(7));
    check_gradients(
        &mut s,
        |s| {
            let x = s.value("x").clone();
            let h0 = s.value("h0").data().to_vec();
            let (y, c) = g.forward_seq(s, &x, &h0);
            let (dx, dh0) = g.backward_seq(s, &c, &r);
            add_input_grad(s, "x", &dx);
            for (a, b) in s.grad_mut("h0").data_mut().iter_mut().zip(&dh0) {
                *a += b;
            }
            projection(&y, &r)
        },
        DEFAULT_STEP,
        60,
    )
}

fn bigru_gradients() -> GradCheckReport {
    let mut s = ParameterStore::new(8);
    let bi = BiGru::new(&mut s, "bi", 2, 3).expect("valid shapes");
    s.add_randn("x", &[4, 2], 1.0).expect("valid shapes");
    let r = Tensor::randn(&[4, 6], 1.0, &mut rng(9));
    check_gradients(
        &mut s,
        |s| {
            let x = s.value("x").clone();
            let (y, c) = bi.forward(s, &x);
            let dx = bi.backward(s, &c, &r);
            add_input_grad(s, "x", &dx);
            projection(&y, &r)
        },
        DEFAULT_STEP,
        40,
    )
}

fn attention_gradients() -> GradCheckReport {
    let mut s = ParameterStore::new(10);
    let att = SelfAttention::new(&mut s, "a", 4).expect("valid shapes");
    s.add_randn("x", &[3, 4], 1.0).expect("valid shapes");
    let r = Tensor::randn(&[3, 4], 1.0, &mut rng(11));
    check_gradients(
        &mut s,
        |s| {
            let x = s.value("x").clone();
            let (y, c) = att.forward(s, &x);
            let dx = att.backward(s, &c, &r);
            add_input_grad(s, "x", &dx);
            projection(&y, &r)
        },
        DEFAULT_STEP,
        40,
    )
}

fn transformer_encoder_gradients() -> GradCheckReport {
    let mut s = ParameterStore::new(12);
    let enc = TransformerEncoder::new(&mut s, "t", 2, 4, 6).expect("valid shapes");
    // Move biases away from zero so ReLU kinks are not hit exactly.
    let biases: Vec<String> = s.names().filter(|n| n.ends_with(".b")).map(String::from).collect();
    for (i, b) in biases.iter().enumerate() {
        let shape = s.value(b).shape().to_vec();
        *s.value_mut(b) = Tensor::randn(&shape, 0.2, &mut rng(100 + i as u64));
    }
    s.add_randn("x", &[3, 4], 1.0).expect("valid shapes");
    let r = Tensor::randn(&[3, 4], 1.0, &mut rng(13));
    check_gradients(
        &mut s,
        |s| {
            let x = s.value("x").clone();
            let (y, c) = enc.forward(s, &x);
            let dx = enc.backward(s, &c, &r);
            add_input_grad(s, "x", &dx);
            projection(&y, &r)
        },
        DEFAULT_STEP,
        30,
    )
}

fn pointer_cross_entropy_gradients() -> GradCheckReport {
    let mut s = ParameterStore::new(14);
    let p = PointerScorer::new(&mut s, "p", 4, 3, 5).expect("valid shapes");
    s.add_randn("enc", &[6, 4], 1.0).expect("valid shapes");
    s.add_randn("d", &[3], 1.0).expect("valid shapes");
    check_gradients(
        &mut s,
        |s| {
            let enc = s.value("enc").clone();
            let d = s.value("d").data().to_vec();
            let keys = p.keys(s, &enc);
            let (u, c) = p.scores(s, &keys, &d, 2..6);
            let (loss, du) = masked_softmax_ce(&u, 2..6, 4).expect("valid shapes");
            let mut dproj = Tensor::zeros(keys.proj.shape());
            let dd = p.scores_backward(s, &c, &du, &mut dproj);
            let denc = p.keys_backward(s, &enc, &dproj);
            add_input_grad(s, "enc", &denc);
            for (a, b) in s.grad_mut("d").data_mut().iter_mut().zip(&dd) {
                *a += b;
            }
            loss
        },
        DEFAULT_STEP,
        40,
    )
}

fn embedding_bag_gradients() -> GradCheckReport {
    let mut s = ParameterStore::new(15);
    let e = EmbeddingBag::new(&mut s, "e", 10, 3).expect("valid shapes");
    let ids = [1usize, 4, 4, 7];
    let r = [0.3, -1.2, 0.8];
    check_gradients(
        &mut s,
        |s| {
            let v = e.embed(s, &ids);
            e.backward(s, &ids, &r);
            dot(&v, &r)
        },
        DEFAULT_STEP,
        30,
    )
}

fn bce_gradients_tight() -> GradCheckReport {
    let logits = Tensor::randn(&[7], 2.0, &mut rng(16));
    let labels = [1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0];
    let mut s = ParameterStore::new(0);
    s.add("z", logits).expect("valid shapes");
    check_gradients(
        &mut s,
        |s| {
            let (loss, g) = sigmoid_bce(s.value("z").data(), &labels).expect("valid shapes");
            for (a, b) in s.grad_mut("z").data_mut().iter_mut().zip(&g) {
                *a += b;
            }
            loss
        },
        DEFAULT_STEP,
        10,
    )
}
