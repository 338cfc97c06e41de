//! Error types for the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LangError {
    #[error("unknown language tag `{0}` (expected one of: be, ru, uk)")]
    UnknownTag(String),
}

/// Errors from CoNLL-U parsing and trigram extraction.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: expected 10 tab-separated columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: empty FORM column")]
    EmptyForm { line: usize },
    #[error("line {line}: `{tag}` is not a Universal Dependencies POS tag")]
    BadUpos { line: usize, tag: String },
    #[error("line {line}: unparseable token id `{id}`")]
    BadTokenId { line: usize, id: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Errors from annotation task construction, aggregation and dataset IO.
#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("word `{0}` contains no vowel; annotation task is undefined")]
    NoVowels(String),
    #[error("expected exactly 3 answers, got {0}")]
    AnswerCount(usize),
    #[error("answer index {index} out of range for {options} options")]
    AnswerOutOfRange { index: usize, options: usize },
    #[error("entry {entry}: stress_pos {pos} does not point at a vowel of `{word}`")]
    StressNotVowel {
        entry: String,
        pos: usize,
        word: String,
    },
    #[error("entry {entry}: stress_pos {pos} out of range for `{word}`")]
    StressOutOfRange {
        entry: String,
        pos: usize,
        word: String,
    },
    #[error("entry {entry}: context word `{word}` contains a stress mark")]
    MarkedContext { entry: String, word: String },
    #[error("line {line}: {source}")]
    Malformed {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: {source}")]
    InvalidEntry {
        line: usize,
        #[source]
        source: Box<AnnotationError>,
    },
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Errors from context building and example encoding.
#[derive(Debug, Error)]
pub enum EncodingError {
    #[error("center word is empty")]
    EmptyWord,
    #[error("built context is {len} characters, limit is {max_len}")]
    TooLong { len: usize, max_len: usize },
    #[error("stress position {pos} is outside the center word `{word}`")]
    StressOutOfRange { pos: usize, word: String },
    #[error("cannot build a vocabulary from an empty dataset")]
    EmptyDataset,
    #[error("vocabulary file line {line}: expected a single character, got `{text}`")]
    BadVocabLine { line: usize, text: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Errors from the neural core.
#[derive(Debug, Error)]
pub enum NeuroError {
    #[error("sequence length {len} exceeds max_len {max_len}")]
    TooLong { len: usize, max_len: usize },
    #[error("empty input sequence")]
    EmptySequence,
    #[error("non-finite activation at step {step} ({context})")]
    NonFinite { step: usize, context: &'static str },
    #[error("non-finite gradient in tensor `{tensor}`")]
    NonFiniteGradient { tensor: &'static str },
    #[error("character id {id} outside vocabulary of size {vocab}")]
    IdOutOfRange { id: usize, vocab: usize },
}

/// Errors from the checkpoint container format.
#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("bad magic header (not a model checkpoint)")]
    BadMagic,
    #[error("unsupported checkpoint format version {0}")]
    Version(u8),
    #[error("checkpoint is truncated or corrupt: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Errors from training and prediction.
#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training set is empty")]
    EmptyTrainSet,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no training entry could be encoded ({skipped} skipped)")]
    NothingEncodable { skipped: usize },
    #[error("loss diverged (non-finite) at epoch {epoch}, batch {batch}")]
    Diverged { epoch: usize, batch: usize },
    #[error("word `{0}` contains no vowel of the requested language")]
    NoVowels(String),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Neuro(#[from] NeuroError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

/// Errors from evaluation and the experiment matrix.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("combo references language `{0}` with no dataset")]
    MissingLanguage(String),
    #[error("empty train-language combo")]
    EmptyCombo,
    #[error(transparent)]
    Train(#[from] TrainError),
}
