use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::Corpus;

/// Suffix appended to the id of every direction-flipped pair.
pub const REVERSED_SUFFIX: &str = ":rev";

/// The original pairs followed by their direction-flipped copies.
///
/// Flipped ids get [`REVERSED_SUFFIX`]. If that would clash with an existing
/// id (flipping an already flipped corpus), `:rev2`, `:rev3`, ... are tried
/// in turn.
pub fn flip_concat(corpus: &Corpus) -> Corpus {
    let ids: BTreeSet<&str> = corpus.pairs().iter().map(|p| p.id.as_str()).collect();
    let mut suffix = String::from(REVERSED_SUFFIX);
    let mut generation = 1;
    while corpus
        .pairs()
        .iter()
        .any(|p| ids.contains(format!("{}{}", p.id, suffix).as_str()))
    {
        generation += 1;
        suffix = format!("{REVERSED_SUFFIX}{generation}");
    }

    let mut pairs = Vec::with_capacity(corpus.len() * 2);
    pairs.extend(corpus.pairs().iter().cloned());
    pairs.extend(corpus.pairs().iter().map(|p| {
        let mut f = p.flipped();
        f.id.push_str(&suffix);
        f
    }));
    Corpus::from_valid(corpus.name().into(), pairs)
}
