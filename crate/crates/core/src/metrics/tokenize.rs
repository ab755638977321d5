use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

/// Tokenizer id recorded in metric signatures.
pub const TOKENIZER_ID: &str = "13a-lite";

/// Whitespace-free, non-empty tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenizedSentence {
    tokens: Vec<String>,
}

impl TokenizedSentence {
    /// Wraps tokens, dropping empties and splitting any that hold whitespace.
    pub fn from_tokens<S: AsRef<str>>(tokens: impl IntoIterator<Item = S>) -> Self {
        TokenizedSentence {
            tokens: tokens
                .into_iter()
                .flat_map(|t| {
                    t.as_ref()
                        .split_whitespace()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                })
                .collect(),
        }
    }

    /// Splits on whitespace only.
    pub fn whitespace(text: &str) -> Self {
        Self::from_tokens(text.split_whitespace())
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

fn is_unicode_punct(c: char) -> bool {
    !c.is_ascii() && c.general_category_group() == GeneralCategoryGroup::Punctuation
}

/// Reference tokenizer.
///
/// 1. Non-ASCII punctuation is split off.
/// 2. ASCII punctuation is split off, except `.`/`,` between two digits and
///    a `.` preceded by a letter and followed by a non-space character.
/// 3. The result is split on whitespace.
pub fn tokenize_13a(text: &str) -> TokenizedSentence {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len() + 8);
    for (i, &c) in chars.iter().enumerate() {
        let prev = i.checked_sub(1).map(|j| chars[j]);
        let next = chars.get(i + 1).copied();
        let split = if c.is_ascii_punctuation() {
            let between_digits = matches!(c, '.' | ',')
                && prev.is_some_and(|p| p.is_ascii_digit())
                && next.is_some_and(|n| n.is_ascii_digit());
            let abbreviation = c == '.'
                && prev.is_some_and(char::is_alphabetic)
                && next.is_some_and(|n| !n.is_whitespace());
            !(between_digits || abbreviation)
        } else {
            is_unicode_punct(c)
        };
        if split {
            out.push(' ');
            out.push(c);
            out.push(' ');
        } else {
            out.push(c);
        }
    }
    TokenizedSentence::whitespace(&out)
}
