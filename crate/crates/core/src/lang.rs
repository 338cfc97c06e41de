//! Language tags and the vowel inventories the rest of the pipeline keys on.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::LangError;

/// Combining acute accent used to mark stress in annotated text.
pub const COMBINING_ACUTE: char = '\u{0301}';

/// The languages covered by the datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lang {
    /// Belarusian
    Be,
    /// Russian
    Ru,
    /// Ukrainian
    Uk,
}

impl Lang {
    pub const ALL: [Lang; 3] = [Lang::Be, Lang::Ru, Lang::Uk];

    pub fn tag(self) -> &'static str {
        match self {
            Lang::Be => "be",
            Lang::Ru => "ru",
            Lang::Uk => "uk",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Lang::Be => "Belarusian",
            Lang::Ru => "Russian",
            Lang::Uk => "Ukrainian",
        }
    }

    /// Lowercase vowel inventory of the language.
    pub fn vowels(self) -> &'static [char] {
        match self {
            Lang::Ru => &['а', 'е', 'ё', 'и', 'о', 'у', 'ы', 'э', 'ю', 'я'],
            Lang::Uk => &['а', 'е', 'є', 'и', 'і', 'о', 'у', 'ю', 'я'],
            Lang::Be => &['а', 'е', 'ё', 'і', 'о', 'у', 'ы', 'э', 'ю', 'я'],
        }
    }

    /// Case-insensitive vowel test.
    pub fn is_vowel(self, c: char) -> bool {
        let lower = c.to_lowercase().next().unwrap_or(c);
        self.vowels().contains(&lower)
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Lang {
    type Err = LangError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "be" => Ok(Lang::Be),
            "ru" => Ok(Lang::Ru),
            "uk" => Ok(Lang::Uk),
            other => Err(LangError::UnknownTag(other.to_string())),
        }
    }
}

/// True for code points in the Cyrillic block (letters of all three alphabets).
pub fn is_cyrillic_letter(c: char) -> bool {
    ('\u{0400}'..='\u{04FF}').contains(&c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip() {
        for lang in Lang::ALL {
            assert_eq!(lang.tag().parse::<Lang>().unwrap(), lang);
        }
        assert!("xx".parse::<Lang>().is_err());
    }

    #[test]
    fn vowel_sets_differ_where_the_alphabets_do() {
        assert!(Lang::Ru.is_vowel('ы'));
        assert!(!Lang::Uk.is_vowel('ы'));
        assert!(Lang::Uk.is_vowel('є'));
        assert!(!Lang::Ru.is_vowel('є'));
        assert!(Lang::Be.is_vowel('і'));
        assert!(!Lang::Ru.is_vowel('і'));
    }

    #[test]
    fn vowel_test_is_case_insensitive() {
        assert!(Lang::Ru.is_vowel('О'));
        assert!(Lang::Ru.is_vowel('Ё'));
        assert!(!Lang::Ru.is_vowel('Т'));
    }

    #[test]
    fn cyrillic_check() {
        assert!("вороналетитsquі".chars().take(11).all(is_cyrillic_letter));
        assert!(!is_cyrillic_letter('a'));
        assert!(!is_cyrillic_letter('1'));
        assert!(!is_cyrillic_letter('-'));
        assert!(is_cyrillic_letter('ґ'));
        assert!(is_cyrillic_letter('ў'));
    }
}
