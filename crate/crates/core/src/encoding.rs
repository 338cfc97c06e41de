//! Character-level model input/output: stress-mark stripping, 3-character
//! context windows with short-word concatenation, vocabulary, and the
//! single-hot binary label sequence.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::annotation::Trigram;
use crate::error::EncodingError;
use crate::lang::{Lang, COMBINING_ACUTE};

/// Separator written between a full 3-character context and the center word.
pub const SEPARATOR: char = ' ';
/// Joiner used when a short neighbor (1-2 characters) is concatenated whole.
pub const JOINER: char = '_';

/// Remove combining acute accents; all other characters keep their order.
pub fn strip_stress_marks(text: &str) -> String {
    text.chars().filter(|&c| c != COMBINING_ACUTE).collect()
}

/// 1-based character indices of the vowels of `lang` in `word`.
pub fn vowel_positions(word: &str, lang: Lang) -> Vec<usize> {
    word.chars()
        .enumerate()
        .filter(|(_, c)| lang.is_vowel(*c))
        .map(|(i, _)| i + 1)
        .collect()
}

/// Character-to-id mapping with reserved ids PAD=0, UNK=1, SEP=2.
///
/// Both the plain separator and the short-word joiner map to SEP, so the
/// models see a single boundary symbol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharVocab {
    chars: Vec<char>,
    #[serde(skip)]
    index: HashMap<char, usize>,
}

pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;
pub const SEP_ID: usize = 2;
const RESERVED: usize = 3;

impl CharVocab {
    /// Build from a character inventory; duplicates and the separator
    /// characters are dropped, the rest sorted by code point.
    pub fn from_chars(chars: impl IntoIterator<Item = char>) -> CharVocab {
        let mut chars: Vec<char> = chars
            .into_iter()
            .filter(|&c| c != SEPARATOR && c != JOINER)
            .collect();
        chars.sort_unstable();
        chars.dedup();
        let index = chars
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i + RESERVED))
            .collect();
        CharVocab { chars, index }
    }

    /// Number of ids, reserved ones included.
    pub fn len(&self) -> usize {
        self.chars.len() + RESERVED
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    /// Map a context character to its id; unseen characters become UNK.
    pub fn id_of(&self, c: char) -> usize {
        if c == SEPARATOR || c == JOINER {
            return SEP_ID;
        }
        self.index.get(&c).copied().unwrap_or(UNK_ID)
    }

    /// Non-reserved characters in id order.
    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    /// Vocabulary file: UTF-8, one character per line; the character on
    /// 0-based line `i` has id `i + 3` (ids 0-2 are reserved).
    pub fn write_to<W: Write>(&self, mut sink: W) -> Result<(), EncodingError> {
        for &c in &self.chars {
            writeln!(sink, "{c}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<CharVocab, EncodingError> {
        let mut chars = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let mut it = line.chars();
            match (it.next(), it.next()) {
                (Some(c), None) => chars.push(c),
                _ => {
                    return Err(EncodingError::BadVocabLine {
                        line: i + 1,
                        text: line,
                    })
                }
            }
        }
        Ok(CharVocab::rebuild(chars))
    }

    /// Restore from an already-ordered character list (checkpoint loading).
    pub fn rebuild(chars: Vec<char>) -> CharVocab {
        let index = chars
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i + RESERVED))
            .collect();
        CharVocab { chars, index }
    }
}

fn normalize(text: &str) -> String {
    strip_stress_marks(text).to_lowercase()
}

/// Build the context string around a center word.
///
/// The neighbor contributes its last three characters behind a separator;
/// a shorter neighbor (1-2 characters) is concatenated whole with the `_`
/// joiner; an empty neighbor is omitted. Returns the string and the
/// character span of the center word within it.
///
/// `prev`/`next` are expected stress-stripped and lowercased.
pub fn build_context(
    prev: &str,
    word: &str,
    next: &str,
) -> Result<(String, Range<usize>), EncodingError> {
    if word.is_empty() {
        return Err(EncodingError::EmptyWord);
    }
    let mut out = String::new();
    let prev_chars: Vec<char> = prev.chars().collect();
    if prev_chars.len() >= 3 {
        out.extend(&prev_chars[prev_chars.len() - 3..]);
        out.push(SEPARATOR);
    } else if !prev_chars.is_empty() {
        out.extend(&prev_chars);
        out.push(JOINER);
    }
    let start = out.chars().count();
    out.push_str(word);
    let end = start + word.chars().count();
    let next_chars: Vec<char> = next.chars().collect();
    if next_chars.len() >= 3 {
        out.push(SEPARATOR);
        out.extend(&next_chars[next_chars.len() - 3..]);
    } else if !next_chars.is_empty() {
        out.push(JOINER);
        out.extend(&next_chars);
    }
    Ok((out, start..end))
}

/// Model input for one trigram: character ids, center span, vowel mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedInput {
    pub char_ids: Vec<usize>,
    pub center_span: Range<usize>,
    pub vowel_mask: Vec<bool>,
}

impl EncodedInput {
    pub fn len(&self) -> usize {
        self.char_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.char_ids.is_empty()
    }
}

/// An encoded training example: input plus the single-hot label sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedExample {
    pub input: EncodedInput,
    /// One label per character; exactly one is 1, inside the center span.
    pub labels: Vec<u8>,
}

impl EncodedExample {
    pub fn len(&self) -> usize {
        self.input.len()
    }

    pub fn is_empty(&self) -> bool {
        self.input.is_empty()
    }

    /// Sequence position of the stressed character.
    pub fn stress_index(&self) -> usize {
        self.labels
            .iter()
            .position(|&l| l == 1)
            .expect("one-hot labels")
    }
}

/// Encode the context of a (possibly unlabeled) trigram.
pub fn encode_input(
    prev: &str,
    word: &str,
    next: &str,
    lang: Lang,
    vocab: &CharVocab,
    max_len: usize,
) -> Result<EncodedInput, EncodingError> {
    let word = normalize(word);
    let (context, center_span) = build_context(&normalize(prev), &word, &normalize(next))?;
    let chars: Vec<char> = context.chars().collect();
    if chars.len() > max_len {
        return Err(EncodingError::TooLong {
            len: chars.len(),
            max_len,
        });
    }
    let char_ids: Vec<usize> = chars.iter().map(|&c| vocab.id_of(c)).collect();
    let vowel_mask: Vec<bool> = chars
        .iter()
        .enumerate()
        .map(|(i, &c)| center_span.contains(&i) && lang.is_vowel(c))
        .collect();
    Ok(EncodedInput {
        char_ids,
        center_span,
        vowel_mask,
    })
}

/// Encode a labeled trigram; the single 1 label sits at
/// `center_span.start + stress_pos - 1`.
pub fn encode(
    trigram: &Trigram,
    vocab: &CharVocab,
    max_len: usize,
) -> Result<EncodedExample, EncodingError> {
    let input = encode_input(
        &trigram.prev,
        &trigram.word,
        &trigram.next,
        trigram.lang,
        vocab,
        max_len,
    )?;
    let word_len = trigram.word.chars().count();
    if trigram.stress_pos == 0 || trigram.stress_pos > word_len {
        return Err(EncodingError::StressOutOfRange {
            pos: trigram.stress_pos,
            word: trigram.word.clone(),
        });
    }
    let stress_index = input.center_span.start + trigram.stress_pos - 1;
    let mut labels = vec![0u8; input.len()];
    labels[stress_index] = 1;
    Ok(EncodedExample { input, labels })
}

/// Vocabulary over all characters appearing in the dataset's built contexts.
pub fn build_vocab(dataset: &[Trigram]) -> Result<CharVocab, EncodingError> {
    if dataset.is_empty() {
        return Err(EncodingError::EmptyDataset);
    }
    let mut chars = Vec::new();
    for entry in dataset {
        let (context, _) = build_context(
            &normalize(&entry.prev),
            &normalize(&entry.word),
            &normalize(&entry.next),
        )?;
        chars.extend(context.chars());
    }
    Ok(CharVocab::from_chars(chars))
}
