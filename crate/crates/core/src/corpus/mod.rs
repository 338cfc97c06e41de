//! Corpus construction: CoNLL-U parsing, trigram extraction and filtering,
//! and synthetic rule-based corpora.

pub mod conllu;
pub mod synthetic;
mod trigram;

pub use conllu::{parse_conllu, ConlluSentences, Sentence, Token, Upos};
pub use synthetic::{generate_synthetic_corpus, StressRule};
pub use trigram::{extract_trigrams, filter_trigrams, trigram_drop_reason, DropReason, RawTrigram};
