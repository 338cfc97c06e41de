//! Training, prediction with the vowel-constrained argmax rule, and
//! checkpoint persistence.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotation::Trigram;
use crate::encoding::{
    build_vocab, encode, encode_input, vowel_positions, CharVocab, EncodedExample, EncodedInput,
};
use crate::error::TrainError;
use crate::lang::Lang;
use crate::neuro::{
    accumulate_gradients, forward, init_params, loss, read_checkpoint, write_checkpoint,
    CheckpointContents, HeadTrace, ModelConfig, ModelParams, OptState,
};

/// Decorrelates the epoch-shuffle stream from the init draws.
const SHUFFLE_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Per-epoch training record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_accuracy: Option<f64>,
}

/// A trained model: parameters, configuration, vocabulary and history.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub params: ModelParams<f64>,
    pub config: ModelConfig,
    pub vocab: CharVocab,
    pub history: Vec<EpochStats>,
    /// Training entries skipped because they could not be encoded.
    pub skipped: usize,
}

/// Vowel-constrained argmax over one forward pass: the winning sequence
/// position among center-word vowels, leftmost on ties.
fn predict_position(
    params: &ModelParams<f64>,
    config: &ModelConfig,
    input: &EncodedInput,
) -> Result<usize, TrainError> {
    let trace = forward(params, &input.char_ids, config)?;
    // per-position stress score: p(stress | char) for the local head, the
    // position distribution for the global head
    let scores: Vec<f64> = match &trace.head {
        HeadTrace::Local { probs, .. } => (0..input.len()).map(|t| probs[(t, 1)]).collect(),
        HeadTrace::Global { probs, .. } => probs.clone(),
    };
    let mut best: Option<(usize, f64)> = None;
    for (t, &score) in scores.iter().enumerate() {
        if !input.vowel_mask[t] {
            continue;
        }
        match best {
            Some((_, s)) if score <= s => {}
            _ => best = Some((t, score)),
        }
    }
    best.map(|(t, _)| t)
        .ok_or_else(|| TrainError::NoVowels(String::new()))
}

impl TrainedModel {
    /// Sequence-position prediction on an already encoded input.
    pub fn predict_encoded(&self, input: &EncodedInput) -> Result<usize, TrainError> {
        predict_position(&self.params, &self.config, input)
    }
}

/// Predict the stress position for a word in context, as a 1-based
/// character index into `word`.
pub fn predict_stress(
    model: &TrainedModel,
    prev: &str,
    word: &str,
    next: &str,
    lang: Lang,
) -> Result<usize, TrainError> {
    if vowel_positions(word, lang).is_empty() {
        return Err(TrainError::NoVowels(word.to_string()));
    }
    let input = encode_input(prev, word, next, lang, &model.vocab, model.config.max_len)?;
    let position = model.predict_encoded(&input)?;
    Ok(position - input.center_span.start + 1)
}

fn epoch_dev_accuracy(
    params: &ModelParams<f64>,
    config: &ModelConfig,
    dev: &[(Option<EncodedInput>, usize)],
) -> f64 {
    if dev.is_empty() {
        return 0.0;
    }
    let mut correct = 0usize;
    for (input, stress_index) in dev {
        if let Some(input) = input {
            if let Ok(pos) = predict_position(params, config, input) {
                if pos == *stress_index {
                    correct += 1;
                }
            }
        }
    }
    correct as f64 / dev.len() as f64
}

/// Train a model.
///
/// Deterministic per `(config, data)`: initialization and the per-epoch
/// shuffle both derive from `config.seed`. With a dev set, the parameters
/// from the best dev-accuracy epoch are returned; otherwise the final ones.
pub fn train(
    config: &ModelConfig,
    train_set: &[Trigram],
    dev_set: Option<&[Trigram]>,
) -> Result<TrainedModel, TrainError> {
    if train_set.is_empty() {
        return Err(TrainError::EmptyTrainSet);
    }
    let vocab = build_vocab(train_set)?;
    let mut config = config.clone();
    config.vocab_size = vocab.len();
    config.validate().map_err(TrainError::Config)?;

    let mut examples: Vec<EncodedExample> = Vec::with_capacity(train_set.len());
    let mut skipped = 0usize;
    for entry in train_set {
        match encode(entry, &vocab, config.max_len) {
            Ok(ex) => examples.push(ex),
            Err(_) => skipped += 1,
        }
    }
    if examples.is_empty() {
        return Err(TrainError::NothingEncodable { skipped });
    }

    // dev entries that fail to encode count as permanently incorrect
    let dev: Vec<(Option<EncodedInput>, usize)> = dev_set
        .unwrap_or(&[])
        .iter()
        .map(|t| match encode(t, &vocab, config.max_len) {
            Ok(ex) => {
                let idx = ex.stress_index();
                (Some(ex.input), idx)
            }
            Err(_) => (None, usize::MAX),
        })
        .collect();
    let track_dev = dev_set.is_some();

    let mut params = init_params::<f64>(&config, config.seed);
    let mut opt_state = OptState::new(config.optimizer, &params);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ SHUFFLE_SALT);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, ModelParams<f64>)> = None;

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0f64;
        for (batch_idx, batch) in order.chunks(config.batch_size).enumerate() {
            let mut grads = params.zeros_like();
            let mut batch_loss = 0.0f64;
            for &i in batch {
                let ex = &examples[i];
                let trace = forward(&params, &ex.input.char_ids, &config)?;
                batch_loss += loss(&trace, ex);
                accumulate_gradients(&trace, ex, &params, &config, &mut grads);
            }
            if !batch_loss.is_finite() {
                return Err(TrainError::Diverged {
                    epoch,
                    batch: batch_idx,
                });
            }
            let scale = 1.0 / batch.len() as f64;
            for (_, tensor) in grads.tensors_mut() {
                for g in tensor.iter_mut() {
                    *g *= scale;
                }
            }
            crate::neuro::step(&mut params, &grads, &mut opt_state, &config)?;
            loss_sum += batch_loss;
        }
        let train_loss = loss_sum / examples.len() as f64;
        let dev_accuracy = if track_dev {
            let acc = epoch_dev_accuracy(&params, &config, &dev);
            if best.as_ref().is_none_or(|(b, _)| acc > *b) {
                best = Some((acc, params.clone()));
            }
            Some(acc)
        } else {
            None
        };
        history.push(EpochStats {
            epoch,
            train_loss,
            dev_accuracy,
        });
    }

    if let Some((_, best_params)) = best {
        params = best_params;
    }
    Ok(TrainedModel {
        params,
        config,
        vocab,
        history,
        skipped,
    })
}

/// Write a checkpoint to disk.
pub fn save(model: &TrainedModel, path: &Path) -> Result<(), TrainError> {
    let file = File::create(path).map_err(crate::error::CheckpointError::Io)?;
    let contents = CheckpointContents {
        config: model.config.clone(),
        vocab: model.vocab.clone(),
        params: model.params.clone(),
        history: model.history.clone(),
    };
    write_checkpoint(BufWriter::new(file), &contents)?;
    Ok(())
}

/// Load a checkpoint from disk.
pub fn load(path: &Path) -> Result<TrainedModel, TrainError> {
    let file = File::open(path).map_err(crate::error::CheckpointError::Io)?;
    let contents = read_checkpoint(BufReader::new(file))?;
    Ok(TrainedModel {
        params: contents.params,
        config: contents.config,
        vocab: contents.vocab,
        history: contents.history,
        skipped: 0,
    })
}
