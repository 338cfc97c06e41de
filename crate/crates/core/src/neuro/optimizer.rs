//! Parameter updates: plain SGD and bias-corrected Adam.

use crate::error::NeuroError;

use super::params::{GradientSet, ModelParams};
use super::{ModelConfig, OptimizerKind, Scalar};

/// Optimizer state; Adam keeps first/second moment tensors shaped like the
/// parameters.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum OptState<S> {
    Sgd,
    Adam {
        m: ModelParams<S>,
        v: ModelParams<S>,
        step: u64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    },
}

impl<S: Scalar> OptState<S> {
    pub fn new(kind: OptimizerKind, params: &ModelParams<S>) -> OptState<S> {
        match kind {
            OptimizerKind::Sgd => OptState::Sgd,
            OptimizerKind::Adam {
                beta1,
                beta2,
                epsilon,
            } => OptState::Adam {
                m: params.zeros_like(),
                v: params.zeros_like(),
                step: 0,
                beta1,
                beta2,
                epsilon,
            },
        }
    }
}

/// Apply one update. Errors on non-finite gradients before touching the
/// parameters.
pub fn step<S: Scalar>(
    params: &mut ModelParams<S>,
    grads: &GradientSet<S>,
    state: &mut OptState<S>,
    config: &ModelConfig,
) -> Result<(), NeuroError> {
    for (name, tensor) in grads.tensors() {
        if tensor.iter().any(|g| !g.is_finite()) {
            return Err(NeuroError::NonFiniteGradient { tensor: name });
        }
    }
    let lr = S::from_f64(config.learning_rate).expect("lr fits scalar");
    match state {
        OptState::Sgd => {
            for ((_, p), (_, g)) in params.tensors_mut().into_iter().zip(grads.tensors()) {
                for (pk, gk) in p.iter_mut().zip(g) {
                    *pk -= lr * *gk;
                }
            }
        }
        OptState::Adam {
            m,
            v,
            step,
            beta1,
            beta2,
            epsilon,
        } => {
            *step += 1;
            let b1 = S::from_f64(*beta1).expect("beta1 fits scalar");
            let b2 = S::from_f64(*beta2).expect("beta2 fits scalar");
            let eps = S::from_f64(*epsilon).expect("epsilon fits scalar");
            let one = S::one();
            let bc1 = one - S::from_f64(beta1.powi(*step as i32)).expect("bias correction");
            let bc2 = one - S::from_f64(beta2.powi(*step as i32)).expect("bias correction");
            let moments = m.tensors_mut().into_iter().zip(v.tensors_mut());
            for (((_, p), (_, g)), ((_, mt), (_, vt))) in params
                .tensors_mut()
                .into_iter()
                .zip(grads.tensors())
                .zip(moments)
            {
                for (((pk, gk), mk), vk) in
                    p.iter_mut().zip(g).zip(mt.iter_mut()).zip(vt.iter_mut())
                {
                    *mk = b1 * *mk + (one - b1) * *gk;
                    *vk = b2 * *vk + (one - b2) * *gk * *gk;
                    let m_hat = *mk / bc1;
                    let v_hat = *vk / bc2;
                    *pk -= lr * m_hat / (v_hat.sqrt() + eps);
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuro::{init_params, Head};

    fn config() -> ModelConfig {
        let mut c = ModelConfig::new(Head::Local);
        c.vocab_size = 6;
        c.embedding_dim = 3;
        c.hidden_units = 2;
        c.max_len = 8;
        c.learning_rate = 0.1;
        c
    }

    #[test]
    fn sgd_applies_the_plain_update_rule() {
        let cfg = config();
        let mut params: ModelParams<f64> = init_params(&cfg, 1);
        let expected: Vec<f64> = params
            .tensors()
            .iter()
            .flat_map(|(_, t)| t.iter().copied())
            .collect();
        let mut grads = params.zeros_like();
        for (_, t) in grads.tensors_mut() {
            for g in t.iter_mut() {
                *g = 2.0;
            }
        }
        let mut state = OptState::new(OptimizerKind::Sgd, &params);
        step(&mut params, &grads, &mut state, &cfg).unwrap();
        let after: Vec<f64> = params
            .tensors()
            .iter()
            .flat_map(|(_, t)| t.iter().copied())
            .collect();
        for (a, e) in after.iter().zip(&expected) {
            assert!((a - (e - 0.1 * 2.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn adam_first_step_moves_each_coordinate_by_about_lr() {
        let cfg = config();
        let mut params: ModelParams<f64> = init_params(&cfg, 2);
        let before = params.clone();
        let mut grads = params.zeros_like();
        for (_, t) in grads.tensors_mut() {
            for (i, g) in t.iter_mut().enumerate() {
                *g = if i % 2 == 0 { 0.5 } else { -0.25 };
            }
        }
        let mut state = OptState::new(OptimizerKind::adam_defaults(), &params);
        step(&mut params, &grads, &mut state, &cfg).unwrap();
        for (((_, a), (_, b)), (_, g)) in params
            .tensors()
            .into_iter()
            .zip(before.tensors())
            .zip(grads.tensors())
        {
            for ((x, y), gk) in a.iter().zip(b).zip(g) {
                let moved = y - x;
                // m_hat = g, v_hat = g^2, so the step is lr * sign(g) up to epsilon
                assert!((moved - 0.1 * gk.signum()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn non_finite_gradient_is_rejected_untouched() {
        let cfg = config();
        let mut params: ModelParams<f64> = init_params(&cfg, 3);
        let before = params.clone();
        let mut grads = params.zeros_like();
        grads.fwd.b[0] = f64::NAN;
        let mut state = OptState::new(OptimizerKind::Sgd, &params);
        let err = step(&mut params, &grads, &mut state, &cfg).unwrap_err();
        assert!(matches!(
            err,
            NeuroError::NonFiniteGradient { tensor: "fwd.b" }
        ));
        assert_eq!(params, before);
    }

    #[test]
    fn updates_are_deterministic() {
        let cfg = config();
        let run = || {
            let mut params: ModelParams<f64> = init_params(&cfg, 4);
            let mut grads = params.zeros_like();
            for (_, t) in grads.tensors_mut() {
                for (i, g) in t.iter_mut().enumerate() {
                    *g = (i as f64 * 0.01).sin();
                }
            }
            let mut state = OptState::new(OptimizerKind::adam_defaults(), &params);
            for _ in 0..5 {
                step(&mut params, &grads, &mut state, &cfg).unwrap();
            }
            params
        };
        assert_eq!(run(), run());
    }
}
