//! Seeded hash-sort ordering used for every sampling decision.
//!
//! Membership depends only on `(seed, text)`, never on input order or on a
//! platform RNG.

use alloc::vec::Vec;

use sha2::{Digest, Sha256};

/// `SHA-256(utf8(seed) || 0x00 || utf8(text))`.
pub fn sample_key(seed: &str, text: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.as_bytes());
    h.update([0u8]);
    h.update(text.as_bytes());
    h.finalize().into()
}

/// Indices of `items` sorted ascending by `(sample_key(seed, text), tiebreak)`.
pub fn hash_order<'a, T>(
    seed: &str,
    items: &'a [T],
    text: impl Fn(&'a T) -> &'a str,
    tiebreak: impl Fn(&'a T) -> &'a str,
) -> Vec<usize> {
    let mut keyed: Vec<([u8; 32], &str, usize)> = items
        .iter()
        .enumerate()
        .map(|(i, item)| (sample_key(seed, text(item)), tiebreak(item), i))
        .collect();
    keyed.sort_unstable_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    keyed.into_iter().map(|(_, _, i)| i).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_is_sha256_of_seed_nul_text() {
        // sha256(b"\x00"): empty seed and empty text.
        let k = sample_key("", "");
        assert_eq!(
            k[..4],
            [0x6e, 0x34, 0x0b, 0x9c],
            "sha256 of a single NUL byte starts 6e340b9c"
        );
        assert_ne!(sample_key("a", "b"), sample_key("ab", ""));
    }
}
