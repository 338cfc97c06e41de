//! Character-level word stress detection for East Slavic languages.
//!
//! The pipeline mirrors a full experimental setup: trigram corpora are
//! built from CoNLL-U treebanks ([`corpus`]), stress annotations collected
//! as multiple-choice tasks and aggregated under a unanimity rule
//! ([`annotation`]), trigrams encoded into character sequences with reduced
//! 3-character contexts ([`encoding`]), and two bidirectional-LSTM sequence
//! labelers trained and evaluated on them ([`neuro`], [`models`], [`eval`]):
//!
//! * the **local** model decides stress/no-stress per character;
//! * the **global** model encodes the sequence and decodes one distribution
//!   over stress positions.
//!
//! The numeric core is generic over its scalar type (any [`neuro::Scalar`],
//! e.g. `f32`/`f64`); training and checkpoints are pinned to `f64` via the
//! aliases below.

pub mod annotation;
pub mod corpus;
pub mod encoding;
pub mod error;
pub mod eval;
pub mod lang;
pub mod models;
pub mod neuro;

pub use annotation::Trigram;
pub use encoding::CharVocab;
pub use lang::Lang;
pub use models::TrainedModel;
pub use neuro::{Head, ModelConfig, OptimizerKind};

/// Model parameters at the training precision.
pub type ModelParams64 = neuro::ModelParams<f64>;
/// Gradients at the training precision.
pub type GradientSet64 = neuro::GradientSet<f64>;
/// Forward trace at the training precision.
pub type ForwardTrace64 = neuro::ForwardTrace<f64>;
/// Single-precision parameters, for memory-constrained inference setups.
pub type ModelParams32 = neuro::ModelParams<f32>;
