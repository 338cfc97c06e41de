//! Word trigram extraction and center-word filtering.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::conllu::{Token, Upos};
use crate::lang::{is_cyrillic_letter, Lang, COMBINING_ACUTE};

/// A center token with its immediate neighbors; neighbors are absent at
/// sentence boundaries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTrigram {
    pub prev: Option<Token>,
    pub center: Token,
    pub next: Option<Token>,
}

/// One trigram per token; output length always equals sentence length.
pub fn extract_trigrams(sentence: &[Token]) -> Vec<RawTrigram> {
    (0..sentence.len())
        .map(|i| RawTrigram {
            prev: if i > 0 {
                Some(sentence[i - 1].clone())
            } else {
                None
            },
            center: sentence[i].clone(),
            next: sentence.get(i + 1).cloned(),
        })
        .collect()
}

/// Why a trigram was dropped by [`filter_trigrams`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DropReason {
    /// Center UPOS is one of NUM, PUNCT, SYM, X.
    RejectedPos,
    /// Center form contains a non-Cyrillic character.
    NonCyrillic,
    /// Center form has no vowel of the dataset language.
    NoVowel,
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DropReason::RejectedPos => "non-word POS (NUM/PUNCT/SYM/X)",
            DropReason::NonCyrillic => "non-Cyrillic center",
            DropReason::NoVowel => "no vowel in center",
        };
        f.write_str(s)
    }
}

const REJECTED_POS: [Upos; 4] = [Upos::NUM, Upos::PUNCT, Upos::SYM, Upos::X];

/// Decide whether a trigram survives filtering; `None` means keep.
pub fn trigram_drop_reason(trigram: &RawTrigram, lang: Lang) -> Option<DropReason> {
    let center = &trigram.center;
    if REJECTED_POS.contains(&center.upos) {
        return Some(DropReason::RejectedPos);
    }
    if !center
        .form
        .chars()
        .all(|c| is_cyrillic_letter(c) || c == COMBINING_ACUTE)
    {
        return Some(DropReason::NonCyrillic);
    }
    if !center.form.chars().any(|c| lang.is_vowel(c)) {
        return Some(DropReason::NoVowel);
    }
    None
}

/// Keep only trigrams whose center is an annotatable word of `lang`.
pub fn filter_trigrams(trigrams: Vec<RawTrigram>, lang: Lang) -> Vec<RawTrigram> {
    trigrams
        .into_iter()
        .filter(|t| trigram_drop_reason(t, lang).is_none())
        .collect()
}
