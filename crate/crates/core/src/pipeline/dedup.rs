use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::DedupKey;
use crate::corpus::Corpus;

/// Exact-match deduplication keeping the first occurrence.
///
/// Returns the retained corpus and the number of removed pairs.
pub fn dedup(corpus: &Corpus, key: DedupKey) -> (Corpus, usize) {
    let mut seen: BTreeSet<(&str, &str)> = BTreeSet::new();
    let mut kept = Vec::with_capacity(corpus.len());
    for pair in corpus.pairs() {
        let k = match key {
            DedupKey::Source => (pair.source_text.as_str(), ""),
            DedupKey::Target => ("", pair.target_text.as_str()),
            DedupKey::Both => (pair.source_text.as_str(), pair.target_text.as_str()),
        };
        if seen.insert(k) {
            kept.push(pair.clone());
        }
    }
    let removed = corpus.len() - kept.len();
    (Corpus::from_valid(corpus.name().into(), kept), removed)
}
