//! Forward pass: bidirectional LSTM recurrence plus one of the two output
//! heads, keeping every activation needed by backpropagation.

use crate::encoding::EncodedExample;
use crate::error::NeuroError;

use super::params::{DirectionParams, Matrix};
use super::{Head, ModelConfig, ModelParams, Scalar};

/// Per-step activations of one LSTM direction, indexed by sequence position.
#[derive(Debug, Clone)]
pub struct DirectionTrace<S> {
    pub gate_i: Matrix<S>,
    pub gate_f: Matrix<S>,
    pub gate_g: Matrix<S>,
    pub gate_o: Matrix<S>,
    pub cell: Matrix<S>,
    pub tanh_cell: Matrix<S>,
    pub hidden: Matrix<S>,
}

impl<S: Scalar> DirectionTrace<S> {
    fn zeros(len: usize, hidden: usize) -> DirectionTrace<S> {
        DirectionTrace {
            gate_i: Matrix::zeros(len, hidden),
            gate_f: Matrix::zeros(len, hidden),
            gate_g: Matrix::zeros(len, hidden),
            gate_o: Matrix::zeros(len, hidden),
            cell: Matrix::zeros(len, hidden),
            tanh_cell: Matrix::zeros(len, hidden),
            hidden: Matrix::zeros(len, hidden),
        }
    }
}

/// Output-layer activations.
#[derive(Debug, Clone)]
pub enum HeadTrace<S> {
    /// Per-step logits and 2-way softmax, both `len x 2`.
    Local { logits: Matrix<S>, probs: Matrix<S> },
    /// `max_len` logits; the distribution covers sequence positions only
    /// (padding positions are excluded from the softmax support).
    Global { logits: Vec<S>, probs: Vec<S> },
}

#[derive(Debug, Clone)]
pub struct ForwardTrace<S> {
    pub len: usize,
    pub fwd: DirectionTrace<S>,
    pub bwd: DirectionTrace<S>,
    pub head: HeadTrace<S>,
}

fn sigmoid<S: Scalar>(x: S) -> S {
    S::one() / (S::one() + (-x).exp())
}

fn log_sum_exp<S: Scalar>(logits: &[S]) -> S {
    let max = logits.iter().copied().fold(S::neg_infinity(), S::max);
    let sum: S = logits.iter().map(|&z| (z - max).exp()).sum();
    max + sum.ln()
}

fn softmax_into<S: Scalar>(logits: &[S], out: &mut [S]) {
    let max = logits.iter().copied().fold(S::neg_infinity(), S::max);
    let mut sum = S::zero();
    for (o, &z) in out.iter_mut().zip(logits) {
        *o = (z - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

fn run_direction<S: Scalar>(
    dir: &DirectionParams<S>,
    embedding: &Matrix<S>,
    ids: &[usize],
    hidden: usize,
    reverse: bool,
) -> Result<DirectionTrace<S>, NeuroError> {
    let len = ids.len();
    let mut trace = DirectionTrace::zeros(len, hidden);
    let mut h_prev = vec![S::zero(); hidden];
    let mut c_prev = vec![S::zero(); hidden];
    let mut z = vec![S::zero(); 4 * hidden];
    let mut order: Vec<usize> = (0..len).collect();
    if reverse {
        order.reverse();
    }
    for &t in &order {
        let x = embedding.row(ids[t]);
        for (g, zg) in z.iter_mut().enumerate() {
            let mut acc = dir.b[g];
            for (wk, xk) in dir.w.row(g).iter().zip(x) {
                acc += *wk * *xk;
            }
            for (uk, hk) in dir.u.row(g).iter().zip(&h_prev) {
                acc += *uk * *hk;
            }
            *zg = acc;
        }
        for k in 0..hidden {
            let i = sigmoid(z[k]);
            let f = sigmoid(z[hidden + k]);
            let g = z[2 * hidden + k].tanh();
            let o = sigmoid(z[3 * hidden + k]);
            let c = f * c_prev[k] + i * g;
            let tc = c.tanh();
            let h = o * tc;
            if !c.is_finite() || !h.is_finite() {
                return Err(NeuroError::NonFinite {
                    step: t,
                    context: "lstm state",
                });
            }
            trace.gate_i[(t, k)] = i;
            trace.gate_f[(t, k)] = f;
            trace.gate_g[(t, k)] = g;
            trace.gate_o[(t, k)] = o;
            trace.cell[(t, k)] = c;
            trace.tanh_cell[(t, k)] = tc;
            trace.hidden[(t, k)] = h;
        }
        h_prev.copy_from_slice(trace.hidden.row(t));
        c_prev.copy_from_slice(trace.cell.row(t));
    }
    Ok(trace)
}

/// Run the network over one encoded sequence.
///
/// The hidden state at step `t` is the concatenation of the forward and
/// backward hidden states. The local head emits a 2-way softmax per step;
/// the global head emits one softmax over positions, decoded from the
/// concatenated final hidden states of the two directions.
pub fn forward<S: Scalar>(
    params: &ModelParams<S>,
    char_ids: &[usize],
    config: &ModelConfig,
) -> Result<ForwardTrace<S>, NeuroError> {
    let len = char_ids.len();
    if len == 0 {
        return Err(NeuroError::EmptySequence);
    }
    if len > config.max_len {
        return Err(NeuroError::TooLong {
            len,
            max_len: config.max_len,
        });
    }
    for &id in char_ids {
        if id >= config.vocab_size {
            return Err(NeuroError::IdOutOfRange {
                id,
                vocab: config.vocab_size,
            });
        }
    }
    let h = config.hidden_units;
    let fwd = run_direction(&params.fwd, &params.embedding, char_ids, h, false)?;
    let bwd = run_direction(&params.bwd, &params.embedding, char_ids, h, true)?;

    let head = match config.head {
        Head::Local => {
            let mut logits = Matrix::zeros(len, 2);
            let mut probs = Matrix::zeros(len, 2);
            for t in 0..len {
                for r in 0..2 {
                    let wrow = params.head_w.row(r);
                    let mut acc = params.head_b[r];
                    for (wk, hk) in wrow[..h].iter().zip(fwd.hidden.row(t)) {
                        acc += *wk * *hk;
                    }
                    for (wk, hk) in wrow[h..].iter().zip(bwd.hidden.row(t)) {
                        acc += *wk * *hk;
                    }
                    if !acc.is_finite() {
                        return Err(NeuroError::NonFinite {
                            step: t,
                            context: "local head logit",
                        });
                    }
                    logits[(t, r)] = acc;
                }
                let row = [logits[(t, 0)], logits[(t, 1)]];
                softmax_into(&row, probs.row_mut(t));
            }
            HeadTrace::Local { logits, probs }
        }
        Head::Global => {
            let mut logits = vec![S::zero(); config.max_len];
            for (r, logit) in logits.iter_mut().enumerate() {
                let wrow = params.head_w.row(r);
                let mut acc = params.head_b[r];
                for (wk, hk) in wrow[..h].iter().zip(fwd.hidden.row(len - 1)) {
                    acc += *wk * *hk;
                }
                for (wk, hk) in wrow[h..].iter().zip(bwd.hidden.row(0)) {
                    acc += *wk * *hk;
                }
                if !acc.is_finite() {
                    return Err(NeuroError::NonFinite {
                        step: r,
                        context: "global head logit",
                    });
                }
                *logit = acc;
            }
            let mut probs = vec![S::zero(); len];
            softmax_into(&logits[..len], &mut probs);
            HeadTrace::Global { logits, probs }
        }
    };
    Ok(ForwardTrace {
        len,
        fwd,
        bwd,
        head,
    })
}

/// Training loss for one example.
///
/// Local head: mean over steps of the 2-class cross-entropy against the
/// per-character labels. Global head: categorical cross-entropy of the
/// position distribution against the stressed index. Computed from logits
/// in log-sum-exp form.
pub fn loss<S: Scalar>(trace: &ForwardTrace<S>, example: &EncodedExample) -> S {
    debug_assert_eq!(trace.len, example.len());
    match &trace.head {
        HeadTrace::Local { logits, .. } => {
            let mut total = S::zero();
            for t in 0..trace.len {
                let z = logits.row(t);
                let y = example.labels[t] as usize;
                total += log_sum_exp(z) - z[y];
            }
            total / S::from_usize(trace.len).expect("len fits scalar")
        }
        HeadTrace::Global { logits, .. } => {
            let z = &logits[..trace.len];
            log_sum_exp(z) - z[example.stress_index()]
        }
    }
}
