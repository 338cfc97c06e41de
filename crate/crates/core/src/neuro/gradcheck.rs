//! Finite-difference verification of the analytic gradients.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::encoding::EncodedExample;
use crate::error::NeuroError;

use super::backward::backward;
use super::forward::{forward, loss};
use super::params::{GradientSet, ModelParams};
use super::ModelConfig;

/// Uniformly sampled flat parameter coordinates.
pub fn sample_coordinates(flat_len: usize, samples: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| rng.random_range(0..flat_len))
        .collect()
}

/// Compare a gradient set against central finite differences
/// `(f(p+eps) - f(p-eps)) / 2 eps` at the given coordinates; returns the
/// maximum of `|analytic - numeric| / max(|analytic|, |numeric|, 1e-8)`.
pub fn max_rel_error_vs_fd(
    params: &ModelParams<f64>,
    analytic: &GradientSet<f64>,
    example: &EncodedExample,
    config: &ModelConfig,
    epsilon: f64,
    coords: &[usize],
) -> Result<f64, NeuroError> {
    let ids = &example.input.char_ids;
    let mut work = params.clone();
    let mut max_err = 0.0f64;
    for &coord in coords {
        let original = work.flat_get(coord);
        work.flat_set(coord, original + epsilon);
        let loss_plus = loss(&forward(&work, ids, config)?, example);
        work.flat_set(coord, original - epsilon);
        let loss_minus = loss(&forward(&work, ids, config)?, example);
        work.flat_set(coord, original);
        let numeric = (loss_plus - loss_minus) / (2.0 * epsilon);
        let a = analytic.flat_get(coord);
        let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        if err > max_err {
            max_err = err;
        }
    }
    Ok(max_err)
}

/// Full gradient check: analytic backward against finite differences over
/// `samples` randomly chosen parameter coordinates.
pub fn grad_check(
    params: &ModelParams<f64>,
    example: &EncodedExample,
    config: &ModelConfig,
    epsilon: f64,
    samples: usize,
    seed: u64,
) -> Result<f64, NeuroError> {
    let trace = forward(params, &example.input.char_ids, config)?;
    let analytic = backward(&trace, example, params, config);
    let coords = sample_coordinates(params.flat_len(), samples, seed);
    max_rel_error_vs_fd(params, &analytic, example, config, epsilon, &coords)
}
