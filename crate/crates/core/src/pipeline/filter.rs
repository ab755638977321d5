use alloc::vec::Vec;

use super::Side;
use crate::corpus::Corpus;
use crate::text::word_count;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("invalid length bounds [{min}, {max}]: need 1 <= min <= max")]
pub struct LengthFilterError {
    pub min: usize,
    pub max: usize,
}

/// Keeps pairs whose `side` has between `min_words` and `max_words`
/// whitespace-delimited words, both bounds inclusive.
pub fn filter_length(
    corpus: &Corpus,
    min_words: usize,
    max_words: usize,
    side: Side,
) -> Result<Corpus, LengthFilterError> {
    if min_words == 0 || min_words > max_words {
        return Err(LengthFilterError {
            min: min_words,
            max: max_words,
        });
    }
    let kept: Vec<_> = corpus
        .pairs()
        .iter()
        .filter(|p| {
            let text = match side {
                Side::Source => &p.source_text,
                Side::Target => &p.target_text,
            };
            (min_words..=max_words).contains(&word_count(text))
        })
        .cloned()
        .collect();
    Ok(Corpus::from_valid(corpus.name().into(), kept))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_util::corpus;

    const TWENTY_ONE: &str =
        "w1 w2 w3 w4 w5 w6 w7 w8 w9 w10 w11 w12 w13 w14 w15 w16 w17 w18 w19 w20 w21";
    const TWENTY: &str = "w1 w2 w3 w4 w5 w6 w7 w8 w9 w10 w11 w12 w13 w14 w15 w16 w17 w18 w19 w20";

    #[test]
    fn inclusive_bounds() {
        let c = corpus(&[
            ("one two three four five", "x"),
            ("one two three four", "x"),
            (TWENTY_ONE, "x"),
            (TWENTY, "x"),
        ]);
        let out = filter_length(&c, 5, 20, Side::Source).unwrap();
        let ids: Vec<_> = out.pairs().iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["smol_doc:0", "smol_doc:3"]);
    }

    #[test]
    fn target_side() {
        let c = corpus(&[("a", "one two"), ("b", "one")]);
        assert_eq!(filter_length(&c, 2, 3, Side::Target).unwrap().len(), 1);
    }

    #[test]
    fn rejects_bad_bounds() {
        let c = corpus(&[]);
        assert!(filter_length(&c, 0, 3, Side::Source).is_err());
        assert!(filter_length(&c, 4, 3, Side::Source).is_err());
    }
}
