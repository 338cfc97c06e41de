//! Exact analytic gradients: cross-entropy through the output head, then
//! backpropagation through time for both LSTM directions.

use crate::encoding::EncodedExample;

use super::forward::{DirectionTrace, ForwardTrace, HeadTrace};
use super::params::{DirectionParams, GradientSet, Matrix};
use super::{ModelConfig, ModelParams, Scalar};

/// Gradients of [`super::loss`] with respect to every parameter.
pub fn backward<S: Scalar>(
    trace: &ForwardTrace<S>,
    example: &EncodedExample,
    params: &ModelParams<S>,
    config: &ModelConfig,
) -> GradientSet<S> {
    let mut grads = params.zeros_like();
    accumulate_gradients(trace, example, params, config, &mut grads);
    grads
}

/// Add this example's gradients into an accumulator (used for minibatches).
pub fn accumulate_gradients<S: Scalar>(
    trace: &ForwardTrace<S>,
    example: &EncodedExample,
    params: &ModelParams<S>,
    config: &ModelConfig,
    grads: &mut GradientSet<S>,
) {
    let len = trace.len;
    let h = config.hidden_units;
    debug_assert_eq!(len, example.len());

    // dLoss/dh per direction and sequence position, fed by the head.
    let mut dh_fwd = Matrix::zeros(len, h);
    let mut dh_bwd = Matrix::zeros(len, h);

    match &trace.head {
        HeadTrace::Local { probs, .. } => {
            let scale = S::one() / S::from_usize(len).expect("len fits scalar");
            for t in 0..len {
                let label = example.labels[t] as usize;
                let mut dz = [probs[(t, 0)], probs[(t, 1)]];
                dz[label] -= S::one();
                dz[0] *= scale;
                dz[1] *= scale;
                for (r, &dzr) in dz.iter().enumerate() {
                    grads.head_b[r] += dzr;
                    let wrow = grads.head_w.row_mut(r);
                    for (wk, hk) in wrow[..h].iter_mut().zip(trace.fwd.hidden.row(t)) {
                        *wk += dzr * *hk;
                    }
                    for (wk, hk) in wrow[h..].iter_mut().zip(trace.bwd.hidden.row(t)) {
                        *wk += dzr * *hk;
                    }
                }
                for k in 0..h {
                    let mut vf = S::zero();
                    let mut vb = S::zero();
                    for (r, &dzr) in dz.iter().enumerate() {
                        vf += params.head_w[(r, k)] * dzr;
                        vb += params.head_w[(r, h + k)] * dzr;
                    }
                    dh_fwd[(t, k)] += vf;
                    dh_bwd[(t, k)] += vb;
                }
            }
        }
        HeadTrace::Global { probs, .. } => {
            // encoder vector = [fwd.hidden[len-1]; bwd.hidden[0]];
            // positions >= len are outside the softmax support and get no
            // gradient.
            let target = example.stress_index();
            let vf = trace.fwd.hidden.row(len - 1);
            let vb = trace.bwd.hidden.row(0);
            for (j, &prob) in probs.iter().enumerate().take(len) {
                let mut dz = prob;
                if j == target {
                    dz -= S::one();
                }
                grads.head_b[j] += dz;
                let wrow = grads.head_w.row_mut(j);
                for (wk, hk) in wrow[..h].iter_mut().zip(vf) {
                    *wk += dz * *hk;
                }
                for (wk, hk) in wrow[h..].iter_mut().zip(vb) {
                    *wk += dz * *hk;
                }
                for k in 0..h {
                    dh_fwd[(len - 1, k)] += params.head_w[(j, k)] * dz;
                    dh_bwd[(0, k)] += params.head_w[(j, h + k)] * dz;
                }
            }
        }
    }

    let ids = &example.input.char_ids;
    bptt_direction(
        ids,
        &params.fwd,
        &trace.fwd,
        &dh_fwd,
        h,
        false,
        &params.embedding,
        &mut grads.fwd,
        &mut grads.embedding,
    );
    bptt_direction(
        ids,
        &params.bwd,
        &trace.bwd,
        &dh_bwd,
        h,
        true,
        &params.embedding,
        &mut grads.bwd,
        &mut grads.embedding,
    );
}

/// Backpropagation through one direction's recurrence.
///
/// For the forward direction the predecessor of position `t` is `t - 1`;
/// for the backward direction it is `t + 1`, and the iteration order flips
/// accordingly.
#[allow(clippy::too_many_arguments)]
fn bptt_direction<S: Scalar>(
    ids: &[usize],
    dir_params: &DirectionParams<S>,
    dir_trace: &DirectionTrace<S>,
    dh_head: &Matrix<S>,
    hidden: usize,
    reverse: bool,
    embedding: &Matrix<S>,
    dir_grads: &mut DirectionParams<S>,
    emb_grads: &mut Matrix<S>,
) {
    let len = ids.len();
    let mut dh_rec = vec![S::zero(); hidden];
    let mut dc_rec = vec![S::zero(); hidden];
    let mut dz = vec![S::zero(); 4 * hidden];
    let mut order: Vec<usize> = (0..len).collect();
    if !reverse {
        order.reverse();
    }
    for &t in &order {
        let prev = if reverse {
            if t + 1 < len {
                Some(t + 1)
            } else {
                None
            }
        } else {
            t.checked_sub(1)
        };
        for k in 0..hidden {
            let i = dir_trace.gate_i[(t, k)];
            let f = dir_trace.gate_f[(t, k)];
            let g = dir_trace.gate_g[(t, k)];
            let o = dir_trace.gate_o[(t, k)];
            let tc = dir_trace.tanh_cell[(t, k)];
            let c_prev = prev.map_or(S::zero(), |p| dir_trace.cell[(p, k)]);
            let dh = dh_head[(t, k)] + dh_rec[k];
            let dc = dh * o * (S::one() - tc * tc) + dc_rec[k];
            dz[k] = dc * g * i * (S::one() - i);
            dz[hidden + k] = dc * c_prev * f * (S::one() - f);
            dz[2 * hidden + k] = dc * i * (S::one() - g * g);
            dz[3 * hidden + k] = dh * tc * o * (S::one() - o);
            dc_rec[k] = dc * f;
        }
        let x = embedding.row(ids[t]);
        for (g, &dzg) in dz.iter().enumerate() {
            dir_grads.b[g] += dzg;
            for (wk, xk) in dir_grads.w.row_mut(g).iter_mut().zip(x) {
                *wk += dzg * *xk;
            }
            if let Some(p) = prev {
                let h_prev = dir_trace.hidden.row(p);
                for (uk, hk) in dir_grads.u.row_mut(g).iter_mut().zip(h_prev) {
                    *uk += dzg * *hk;
                }
            }
        }
        for (k, dh) in dh_rec.iter_mut().enumerate() {
            let mut acc = S::zero();
            for (g, &dzg) in dz.iter().enumerate() {
                acc += dir_params.u[(g, k)] * dzg;
            }
            *dh = acc;
        }
        let erow = emb_grads.row_mut(ids[t]);
        for (k, ek) in erow.iter_mut().enumerate() {
            let mut acc = S::zero();
            for (g, &dzg) in dz.iter().enumerate() {
                acc += dir_params.w[(g, k)] * dzg;
            }
            *ek += acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::EncodedInput;
    use crate::neuro::{forward, init_params, Head};

    fn example(ids: Vec<usize>, stress: usize) -> EncodedExample {
        let len = ids.len();
        let mut labels = vec![0u8; len];
        labels[stress] = 1;
        EncodedExample {
            input: EncodedInput {
                char_ids: ids,
                center_span: 0..len,
                vowel_mask: vec![true; len],
            },
            labels,
        }
    }

    #[test]
    fn gradients_have_parameter_shapes_and_are_finite() {
        for head in [Head::Local, Head::Global] {
            let mut cfg = ModelConfig::new(head);
            cfg.vocab_size = 9;
            cfg.embedding_dim = 5;
            cfg.hidden_units = 4;
            cfg.max_len = 12;
            let params: ModelParams<f64> = init_params(&cfg, 2);
            let ex = example(vec![1, 4, 7, 2, 8], 2);
            let trace = forward(&params, &ex.input.char_ids, &cfg).unwrap();
            let grads = backward(&trace, &ex, &params, &cfg);
            assert_eq!(grads.flat_len(), params.flat_len());
            assert!(grads.all_finite());
            // something must flow all the way to the embedding
            assert!(grads.embedding.as_slice().iter().any(|&g| g != 0.0));
        }
    }

    #[test]
    fn unused_embedding_rows_get_zero_gradient() {
        let mut cfg = ModelConfig::new(Head::Global);
        cfg.vocab_size = 10;
        cfg.embedding_dim = 3;
        cfg.hidden_units = 3;
        cfg.max_len = 8;
        let params: ModelParams<f64> = init_params(&cfg, 5);
        let ex = example(vec![2, 4, 2], 1);
        let trace = forward(&params, &ex.input.char_ids, &cfg).unwrap();
        let grads = backward(&trace, &ex, &params, &cfg);
        for row in [0usize, 1, 3, 5, 6, 7, 8, 9] {
            assert!(grads.embedding.row(row).iter().all(|&g| g == 0.0));
        }
        assert!(grads.embedding.row(2).iter().any(|&g| g != 0.0));
    }

    #[test]
    fn accumulate_equals_sum_of_single_backwards() {
        let mut cfg = ModelConfig::new(Head::Local);
        cfg.vocab_size = 7;
        cfg.embedding_dim = 4;
        cfg.hidden_units = 3;
        cfg.max_len = 10;
        let params: ModelParams<f64> = init_params(&cfg, 8);
        let examples = [example(vec![1, 2, 3], 0), example(vec![4, 5, 6, 1], 3)];
        let mut acc = params.zeros_like();
        let mut summed = params.zeros_like();
        for ex in &examples {
            let trace = forward(&params, &ex.input.char_ids, &cfg).unwrap();
            accumulate_gradients(&trace, ex, &params, &cfg, &mut acc);
            let single = backward(&trace, ex, &params, &cfg);
            for ((_, s), (_, g)) in summed.tensors_mut().into_iter().zip(single.tensors()) {
                for (a, b) in s.iter_mut().zip(g) {
                    *a += *b;
                }
            }
        }
        for ((_, a), (_, b)) in acc.tensors().into_iter().zip(summed.tensors()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-15);
            }
        }
    }
}
