//! Cross-module property tests over generated datasets.

use proptest::prelude::*;

use accentor_core::annotation::{emit_dataset, load_dataset, Trigram};
use accentor_core::corpus::conllu::{Token, Upos};
use accentor_core::corpus::extract_trigrams;
use accentor_core::encoding::{
    build_context, build_vocab, encode, strip_stress_marks, vowel_positions,
};
use accentor_core::lang::Lang;

fn lang_strategy() -> impl Strategy<Value = Lang> {
    prop_oneof![Just(Lang::Ru), Just(Lang::Uk), Just(Lang::Be)]
}

/// Pseudo-words over a mixed alphabet; may or may not contain vowels.
fn word_strategy() -> impl Strategy<Value = String> {
    proptest::collection::vec(
        prop_oneof![
            prop_oneof![
                Just('а'),
                Just('о'),
                Just('е'),
                Just('і'),
                Just('ы'),
                Just('є')
            ],
            prop_oneof![
                Just('б'),
                Just('в'),
                Just('р'),
                Just('н'),
                Just('т'),
                Just('л')
            ],
        ],
        1..12,
    )
    .prop_map(|chars| chars.into_iter().collect())
}

/// Valid dataset entries: the stress lands on a vowel of the language.
fn trigram_strategy() -> impl Strategy<Value = Trigram> {
    (
        lang_strategy(),
        word_strategy(),
        word_strategy(),
        word_strategy(),
    )
        .prop_filter_map("center must contain a vowel", |(lang, prev, word, next)| {
            let positions = vowel_positions(&word, lang);
            if positions.is_empty() {
                return None;
            }
            Some((lang, prev, word, next, positions))
        })
        .prop_flat_map(|(lang, prev, word, next, positions)| {
            (0..positions.len()).prop_map(move |i| Trigram {
                prev: prev.clone(),
                word: word.clone(),
                next: next.clone(),
                stress_pos: positions[i],
                lang,
            })
        })
}

proptest! {
    #[test]
    fn dataset_emit_load_is_identity(entries in proptest::collection::vec(trigram_strategy(), 0..20)) {
        let mut wire = Vec::new();
        emit_dataset(&entries, &mut wire).unwrap();
        let reloaded = load_dataset(wire.as_slice()).unwrap();
        prop_assert_eq!(reloaded, entries);
    }

    #[test]
    fn trigram_count_equals_token_count(forms in proptest::collection::vec(word_strategy(), 0..15)) {
        let sentence: Vec<Token> = forms
            .iter()
            .enumerate()
            .map(|(i, form)| Token { form: form.clone(), upos: Upos::NOUN, index: i + 1 })
            .collect();
        let trigrams = extract_trigrams(&sentence);
        prop_assert_eq!(trigrams.len(), sentence.len());
        for (i, t) in trigrams.iter().enumerate() {
            prop_assert_eq!(t.prev.is_some(), i > 0);
            prop_assert_eq!(t.next.is_some(), i + 1 < sentence.len());
        }
    }

    #[test]
    fn context_is_bounded_and_centered(prev in word_strategy(), word in word_strategy(), next in word_strategy()) {
        let (context, span) = build_context(&prev, &word, &next).unwrap();
        let context_len = context.chars().count();
        let word_len = word.chars().count();
        prop_assert!(context_len <= word_len + 8);
        let center: String = context.chars().skip(span.start).take(span.end - span.start).collect();
        prop_assert_eq!(center, word);
    }

    #[test]
    fn encoding_invariants_hold_for_any_valid_entry(entry in trigram_strategy()) {
        let vocab = build_vocab(std::slice::from_ref(&entry)).unwrap();
        let ex = encode(&entry, &vocab, 40).unwrap();
        let ones: Vec<usize> = ex.labels.iter().enumerate().filter(|(_, &l)| l == 1).map(|(i, _)| i).collect();
        prop_assert_eq!(ones.len(), 1);
        let idx = ones[0];
        prop_assert!(ex.input.center_span.contains(&idx));
        prop_assert!(ex.input.vowel_mask[idx]);
        prop_assert_eq!(idx, ex.input.center_span.start + entry.stress_pos - 1);
        prop_assert!(ex.input.char_ids.iter().all(|&id| id < vocab.len()));
        for (i, &m) in ex.input.vowel_mask.iter().enumerate() {
            if m {
                prop_assert!(ex.input.center_span.contains(&i));
            }
        }
    }

    #[test]
    fn stripping_is_idempotent_on_marked_text(word in word_strategy(), positions in proptest::collection::vec(0usize..12, 0..4)) {
        // sprinkle combining accents into the word
        let mut chars: Vec<char> = word.chars().collect();
        for &p in &positions {
            let at = p.min(chars.len());
            chars.insert(at, '\u{0301}');
        }
        let marked: String = chars.into_iter().collect();
        let once = strip_stress_marks(&marked);
        let still_marked = once.contains(accentor_core::lang::COMBINING_ACUTE);
        prop_assert!(!still_marked);
        prop_assert_eq!(strip_stress_marks(&once), once.clone());
        prop_assert_eq!(once, word);
    }
}
