mod common;

use common::cases::{METRIC_PAIRS, TER_PAIRS};
use lrmt_core::metrics::{
    chrf, edit_distance, lcs_len, meteor_lite, rouge_l, ter, BleuStats, MeteorTables,
    TokenizedSentence,
};
use proptest::prelude::*;

fn words(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

fn ws(s: &str) -> TokenizedSentence {
    TokenizedSentence::whitespace(s)
}

#[test]
fn bleu_counts_match_enumeration() {
    for (h, r, _, _) in METRIC_PAIRS {
        let stats = BleuStats::sentence(&words(h), &words(r));
        let oracle = common::bleu_counts(&words(h), &words(r));
        for n in 0..4 {
            assert_eq!(
                (stats.clipped_matches[n], stats.hyp_ngrams[n]),
                oracle[n],
                "{h:?} / {r:?} order {}",
                n + 1
            );
        }
    }
}

#[test]
fn chrf_matches_enumeration() {
    for (h, r, _, _) in METRIC_PAIRS {
        let got = chrf(&[h], &[r], 6, 2.0).unwrap();
        let want = common::chrf(&[(h, r)], 6, 2.0);
        assert!((got - want).abs() < 1e-12, "{h:?}: {got} vs {want}");
    }
    let pairs: Vec<(&str, &str)> = METRIC_PAIRS.iter().map(|p| (p.0, p.1)).collect();
    let hyps: Vec<&str> = pairs.iter().map(|p| p.0).collect();
    let refs: Vec<&str> = pairs.iter().map(|p| p.1).collect();
    let got = chrf(&hyps, &refs, 6, 2.0).unwrap();
    assert!((got - common::chrf(&pairs, 6, 2.0)).abs() < 1e-12);
}

#[test]
fn rouge_matches_exhaustive_lcs() {
    for (h, r, _, _) in METRIC_PAIRS {
        assert_eq!(lcs_len(&words(h), &words(r)), common::lcs_exhaustive(&words(h), &words(r)));
        let got = rouge_l(&ws(h), &ws(r));
        assert!((got - common::rouge_l(&words(h), &words(r))).abs() < 1e-12, "{h:?}");
    }
}

#[test]
fn meteor_matches_hand_alignments() {
    for (h, r, m, chunks) in METRIC_PAIRS {
        let got = meteor_lite(&ws(h), &ws(r), &MeteorTables::default());
        let want = common::meteor_formula(words(h).len(), words(r).len(), m, chunks);
        assert!((got - want).abs() < 1e-12, "{h:?}: {got} vs {want}");
    }
}

#[test]
fn ter_matches_exhaustive_search() {
    for (h, r) in TER_PAIRS {
        let got = ter(&ws(h), &ws(r)).unwrap().edits as usize;
        assert_eq!(got, common::ter_exhaustive(&words(h), &words(r)), "{h:?} / {r:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ter_bounded_by_optimum_and_plain_distance(
        h in proptest::collection::vec("[abcd]", 0..=5),
        r in proptest::collection::vec("[abcd]", 1..=5),
    ) {
        let hs: Vec<&str> = h.iter().map(String::as_str).collect();
        let rs: Vec<&str> = r.iter().map(String::as_str).collect();
        let got = ter(&TokenizedSentence::from_tokens(&hs), &TokenizedSentence::from_tokens(&rs)).unwrap().edits as usize;
        prop_assert!(got <= edit_distance(&hs, &rs));
        prop_assert_eq!(edit_distance(&hs, &rs), common::word_edit_distance(&hs, &rs));
        prop_assert!(got >= common::ter_exhaustive(&hs, &rs));
    }

    #[test]
    fn chrf_and_rouge_match_oracles(h in "[ab ]{0,8}", r in "[abc ]{1,8}") {
        let got = chrf(&[h.as_str()], &[r.as_str()], 6, 2.0).unwrap();
        prop_assert!((got - common::chrf(&[(&h, &r)], 6, 2.0)).abs() < 1e-12);
        let (hw, rw) = (words(&h), words(&r));
        prop_assert_eq!(lcs_len(&hw, &rw), common::lcs_exhaustive(&hw, &rw));
    }

    #[test]
    fn bleu_counts_match_enumeration_random(h in proptest::collection::vec("[ab]", 0..8), r in proptest::collection::vec("[abc]", 0..8)) {
        let hs: Vec<&str> = h.iter().map(String::as_str).collect();
        let rs: Vec<&str> = r.iter().map(String::as_str).collect();
        let stats = BleuStats::sentence(&hs, &rs);
        let oracle = common::bleu_counts(&hs, &rs);
        for n in 0..4 {
            prop_assert_eq!((stats.clipped_matches[n], stats.hyp_ngrams[n]), oracle[n]);
        }
    }
}

#[test]
fn greedy_shift_search_can_miss_the_optimum() {
    let (h, r) = ("a b c d e", "e d c b a");
    let greedy = ter(&ws(h), &ws(r)).unwrap().edits as usize;
    assert_eq!(common::ter_exhaustive(&words(h), &words(r)), 3);
    assert_eq!(greedy, 4);
}
