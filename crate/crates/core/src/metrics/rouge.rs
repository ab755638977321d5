use alloc::format;
use alloc::string::String;
use alloc::vec;

use super::tokenize::TokenizedSentence;

/// Length of the longest common subsequence.
pub fn lcs_len<S: PartialEq>(a: &[S], b: &[S]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// ROUGE-L F1 in [0, 1]; 0 when either side is empty or nothing matches.
pub fn rouge_l(hyp: &TokenizedSentence, reference: &TokenizedSentence) -> f64 {
    if hyp.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let l = lcs_len(hyp.tokens(), reference.tokens());
    if l == 0 {
        return 0.0;
    }
    let p = l as f64 / hyp.len() as f64;
    let r = l as f64 / reference.len() as f64;
    2.0 * p * r / (p + r)
}

pub fn rouge_signature() -> String {
    format!(
        "ROUGE-L|nrefs:1|case:mixed|tok:13a-lite|f:1|agg:sentence-mean|version:{}",
        env!("CARGO_PKG_VERSION")
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws(s: &str) -> TokenizedSentence {
        TokenizedSentence::whitespace(s)
    }

    #[test]
    fn identical() {
        assert_eq!(rouge_l(&ws("a b c"), &ws("a b c")), 1.0);
    }

    #[test]
    fn prefix() {
        // L=2, P=1, R=2/3 -> F1 = 0.8
        let f = rouge_l(&ws("the cat"), &ws("the cat sat"));
        assert!((f - 0.8).abs() < 1e-12);
    }

    #[test]
    fn disjoint_and_empty() {
        assert_eq!(rouge_l(&ws("a b"), &ws("c d")), 0.0);
        assert_eq!(rouge_l(&ws(""), &ws("c d")), 0.0);
    }

    #[test]
    fn lcs_non_contiguous() {
        assert_eq!(lcs_len(&["a", "x", "b", "y", "c"], &["a", "b", "c"]), 3);
        assert_eq!(lcs_len(&["b", "a"], &["a", "b"]), 1);
    }
}
