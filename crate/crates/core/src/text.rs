//! Text canonicalisation shared by every exact-match comparison in the
//! pipeline.

use alloc::string::String;

use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("invalid UTF-8 at byte offset {offset}")]
pub struct InvalidUtf8 {
    pub offset: usize,
}

/// NFC-normalises `raw`, trims it, and collapses internal whitespace runs to
/// a single ASCII space. Case is preserved.
pub fn normalize_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.nfc() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(c);
        }
    }
    out
}

/// Byte-level entry point: validates UTF-8 before normalising.
pub fn normalize_bytes(raw: &[u8]) -> Result<String, InvalidUtf8> {
    match core::str::from_utf8(raw) {
        Ok(s) => Ok(normalize_text(s)),
        Err(e) => Err(InvalidUtf8 {
            offset: e.valid_up_to(),
        }),
    }
}

/// Number of maximal non-whitespace runs.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn collapses_whitespace() {
        assert_eq!(normalize_text("  hello   world "), "hello world");
        assert_eq!(normalize_text("a\t\tb\nc"), "a b c");
        assert_eq!(normalize_text("   "), "");
    }

    #[test]
    fn composes_to_nfc() {
        let nfd = "cafe\u{301}";
        assert_eq!(normalize_text(nfd), "caf\u{e9}");
    }

    #[test]
    fn preserves_case() {
        assert_eq!(normalize_text("Kok  Borok"), "Kok Borok");
    }

    #[test]
    fn reports_offset_of_bad_byte() {
        let bytes = b"ok \xff tail";
        assert_eq!(normalize_bytes(bytes), Err(InvalidUtf8 { offset: 3 }));
        assert_eq!(normalize_bytes(b" fine ").unwrap(), "fine");
    }

    #[test]
    fn counts_words() {
        assert_eq!(word_count("one two three four five"), 5);
        assert_eq!(word_count("  spaced\tout \n words "), 3);
        assert_eq!(word_count(""), 0);
    }

    proptest! {
        #[test]
        fn idempotent(s in "\\PC{0,40}") {
            let once = normalize_text(&s);
            prop_assert_eq!(normalize_text(&once), once.clone());
            prop_assert!(!once.starts_with(' ') && !once.ends_with(' '));
            prop_assert!(!once.contains("  "));
        }
    }
}
