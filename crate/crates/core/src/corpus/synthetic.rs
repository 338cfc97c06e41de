//! Rule-based pseudo-word corpora for desk-scale testing: every entry's
//! stress position follows a fixed positional rule, so a correct model can
//! reach perfect accuracy and any shortfall is implementation error.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::annotation::Trigram;
use crate::encoding::vowel_positions;
use crate::lang::Lang;

/// Positional stress rules for synthetic corpora.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StressRule {
    FirstVowel,
    LastVowel,
    PenultimateVowel,
}

impl StressRule {
    /// Stress position under the rule, or `None` when the rule needs more
    /// vowels than the word has.
    pub fn apply(self, positions: &[usize]) -> Option<usize> {
        match self {
            StressRule::FirstVowel => positions.first().copied(),
            StressRule::LastVowel => positions.last().copied(),
            StressRule::PenultimateVowel => {
                if positions.len() >= 2 {
                    Some(positions[positions.len() - 2])
                } else {
                    None
                }
            }
        }
    }
}

impl fmt::Display for StressRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StressRule::FirstVowel => "first-vowel",
            StressRule::LastVowel => "last-vowel",
            StressRule::PenultimateVowel => "penultimate-vowel",
        };
        f.write_str(s)
    }
}

impl FromStr for StressRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first-vowel" => Ok(StressRule::FirstVowel),
            "last-vowel" => Ok(StressRule::LastVowel),
            "penultimate-vowel" => Ok(StressRule::PenultimateVowel),
            other => Err(format!(
                "unknown stress rule `{other}` (expected first-vowel, last-vowel, penultimate-vowel)"
            )),
        }
    }
}

fn consonants(lang: Lang) -> &'static [char] {
    match lang {
        Lang::Ru => &[
            'б', 'в', 'г', 'д', 'ж', 'з', 'й', 'к', 'л', 'м', 'н', 'п', 'р', 'с', 'т', 'ф', 'х',
            'ц', 'ч', 'ш', 'щ',
        ],
        Lang::Uk => &[
            'б', 'в', 'г', 'ґ', 'д', 'ж', 'з', 'й', 'к', 'л', 'м', 'н', 'п', 'р', 'с', 'т', 'ф',
            'х', 'ц', 'ч', 'ш', 'щ',
        ],
        Lang::Be => &[
            'б', 'в', 'г', 'д', 'ж', 'з', 'й', 'к', 'л', 'м', 'н', 'п', 'р', 'с', 'т', 'ў', 'ф',
            'х', 'ц', 'ч', 'ш',
        ],
    }
}

fn pseudo_word(rng: &mut ChaCha8Rng, lang: Lang, vowel_count: usize) -> String {
    let cons = consonants(lang);
    let vows = lang.vowels();
    let mut word = String::new();
    for _ in 0..vowel_count {
        word.push(cons[rng.random_range(0..cons.len())]);
        word.push(vows[rng.random_range(0..vows.len())]);
    }
    if rng.random_bool(0.5) {
        word.push(cons[rng.random_range(0..cons.len())]);
    }
    word
}

/// Deterministic rule-based corpus: `n` trigrams of Cyrillic pseudo-words
/// with 2-9 vowels in the center word and `stress_pos` assigned by `rule`.
/// The same `(rule, n, seed)` reproduces identical output.
pub fn generate_synthetic_corpus(
    rule: StressRule,
    n: usize,
    seed: u64,
    lang: Lang,
) -> Vec<Trigram> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let (word, stress_pos) = loop {
            let vowel_count = rng.random_range(2..=9);
            let word = pseudo_word(&mut rng, lang, vowel_count);
            let positions = vowel_positions(&word, lang);
            if let Some(pos) = rule.apply(&positions) {
                break (word, pos);
            }
        };
        let prev = if rng.random_bool(0.15) {
            String::new()
        } else {
            let vowel_count = rng.random_range(1..=2);
            pseudo_word(&mut rng, lang, vowel_count)
        };
        let next = if rng.random_bool(0.15) {
            String::new()
        } else {
            let vowel_count = rng.random_range(1..=2);
            pseudo_word(&mut rng, lang, vowel_count)
        };
        out.push(Trigram {
            prev,
            word,
            next,
            stress_pos,
            lang,
        });
    }
    out
}
