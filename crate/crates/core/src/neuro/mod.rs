//! Minimal neural core: character embeddings, one bidirectional LSTM layer,
//! two output heads (per-step 2-way softmax, or one softmax over positions),
//! exact backpropagation through time, optimizers, and finite-difference
//! gradient verification.
//!
//! Everything is generic over the scalar type; training and checkpoints use
//! `f64` (see the crate-root aliases).

mod backward;
mod checkpoint;
mod forward;
mod gradcheck;
mod optimizer;
mod params;

use std::fmt;
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::{Deserialize, Serialize};

pub use backward::{accumulate_gradients, backward};
pub use checkpoint::{
    read_checkpoint, write_checkpoint, CheckpointContents, FORMAT_VERSION, MAGIC,
};
pub use forward::{forward, loss, DirectionTrace, ForwardTrace, HeadTrace};
pub use gradcheck::{grad_check, max_rel_error_vs_fd, sample_coordinates};
pub use optimizer::{step, OptState};
pub use params::{init_params, DirectionParams, GradientSet, Matrix, ModelParams};

/// Scalar type the core math is generic over.
pub trait Scalar:
    Float + NumAssign + FromPrimitive + ToPrimitive + Sum<Self> + fmt::Debug + fmt::Display + 'static
{
}

impl<T> Scalar for T where
    T: Float
        + NumAssign
        + FromPrimitive
        + ToPrimitive
        + Sum<T>
        + fmt::Debug
        + fmt::Display
        + 'static
{
}

/// Output-layer architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Head {
    /// Independent stress/no-stress decision per character.
    Local,
    /// One distribution over stress positions decoded from the sequence
    /// encoding.
    Global,
}

impl fmt::Display for Head {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Head::Local => "local",
            Head::Global => "global",
        })
    }
}

impl FromStr for Head {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "local" => Ok(Head::Local),
            "global" => Ok(Head::Global),
            other => Err(format!("unknown head `{other}` (expected local or global)")),
        }
    }
}

/// Optimizer selection with its constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum OptimizerKind {
    Sgd,
    Adam {
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    },
}

impl OptimizerKind {
    pub fn adam_defaults() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl FromStr for OptimizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adam" => Ok(OptimizerKind::adam_defaults()),
            other => Err(format!(
                "unknown optimizer `{other}` (expected sgd or adam)"
            )),
        }
    }
}

/// Model and training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub embedding_dim: usize,
    pub hidden_units: usize,
    pub max_len: usize,
    pub head: Head,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub optimizer: OptimizerKind,
}

impl ModelConfig {
    pub fn new(head: Head) -> ModelConfig {
        ModelConfig {
            vocab_size: 0,
            embedding_dim: 32,
            hidden_units: 32,
            max_len: 40,
            head,
            learning_rate: 1e-3,
            batch_size: 32,
            epochs: 20,
            seed: 0,
            optimizer: OptimizerKind::adam_defaults(),
        }
    }

    /// Rows of the output head's dense layer.
    pub fn head_rows(&self) -> usize {
        match self.head {
            Head::Local => 2,
            Head::Global => self.max_len,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.vocab_size == 0
            || self.embedding_dim == 0
            || self.hidden_units == 0
            || self.max_len == 0
            || self.batch_size == 0
        {
            return Err("all dimensions must be >= 1".into());
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err("learning_rate must be > 0".into());
        }
        Ok(())
    }
}
