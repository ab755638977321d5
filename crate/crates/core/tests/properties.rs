use lrmt_core::humaneval::cohen_kappa;
use lrmt_core::metrics::{tokenize_13a, BleuStats};
use lrmt_core::quality::{filter_by_threshold, population_stats, retention_curve};
use lrmt_core::{Corpus, LanguageTag, Origin, SentencePair};
use proptest::prelude::*;

fn two_pass(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn sentence_stats(h: &str, r: &str) -> BleuStats {
    let (h, r) = (tokenize_13a(h), tokenize_13a(r));
    BleuStats::sentence(h.tokens(), r.tokens())
}

fn scored_corpus(scores: &[f64]) -> Corpus {
    let pairs = scores
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let mut p = SentencePair::new(
                format!("synthetic:{i}"),
                &format!("source {i}"),
                &format!("target {i}"),
                LanguageTag::english(),
                LanguageTag::kokborok(),
                Origin::Synthetic,
            )
            .unwrap();
            p.score = Some(s);
            p
        })
        .collect();
    Corpus::new("scored", pairs).unwrap()
}

proptest! {
    #[test]
    fn bleu_stats_sum_equals_whole_corpus(
        pairs in proptest::collection::vec(("[a-d ]{1,20}", "[a-d ]{1,20}"), 2..30),
        cut in any::<prop::sample::Index>(),
    ) {
        let stats: Vec<BleuStats> = pairs.iter().map(|(h, r)| sentence_stats(h, r)).collect();
        let k = cut.index(stats.len());
        let left: BleuStats = stats[..k].iter().cloned().sum();
        let right: BleuStats = stats[k..].iter().cloned().sum();
        let whole: BleuStats = stats.iter().cloned().sum();
        prop_assert_eq!(&(left.clone() + right.clone()), &whole);
        prop_assert_eq!((left + right).score().to_bits(), whole.score().to_bits());
    }

    #[test]
    fn kappa_symmetric_and_label_invariant(
        ab in proptest::collection::vec((1u8..=5, 1u8..=5), 1..60),
        perm in Just([1u8, 2, 3, 4, 5]).prop_shuffle(),
    ) {
        let a: Vec<u8> = ab.iter().map(|p| p.0).collect();
        let b: Vec<u8> = ab.iter().map(|p| p.1).collect();
        let k = cohen_kappa(&a, &b).unwrap();
        prop_assert_eq!(k.to_bits(), cohen_kappa(&b, &a).unwrap().to_bits());
        let relabel = |v: &[u8]| v.iter().map(|&x| perm[(x - 1) as usize]).collect::<Vec<_>>();
        prop_assert_eq!(k.to_bits(), cohen_kappa(&relabel(&a), &relabel(&b)).unwrap().to_bits());
        prop_assert!(k <= 1.0);
    }

    #[test]
    fn stats_match_two_pass(xs in proptest::collection::vec(-1.0f64..=1.0, 1..300)) {
        let got = population_stats(&xs).unwrap();
        let (mean, std) = two_pass(&xs);
        prop_assert!((got.mean - mean).abs() < 1e-9);
        prop_assert!((got.std - std).abs() < 1e-9);
    }

    #[test]
    fn retention_agrees_with_filter_and_is_monotone(
        xs in proptest::collection::vec(-1.0f64..=1.0, 1..80),
        mut ts in proptest::collection::vec(-1.0f64..=1.0, 1..8),
    ) {
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let curve = retention_curve(&xs, &ts).unwrap();
        let corpus = scored_corpus(&xs);
        let mut prev = usize::MAX;
        for p in &curve.points {
            let (kept, dropped) = filter_by_threshold(&corpus, p.threshold).unwrap();
            prop_assert_eq!(p.retained, kept.len());
            prop_assert_eq!(kept.len() + dropped.len(), xs.len());
            prop_assert!(p.retained <= prev);
            prev = p.retained;
        }
    }
}

#[test]
fn kappa_fixed_points() {
    assert_eq!(cohen_kappa(&[3, 4, 5, 2], &[3, 4, 5, 2]).unwrap(), 1.0);
    assert_eq!(cohen_kappa(&[1, 1, 2, 2], &[1, 2, 1, 2]).unwrap(), 0.0);
    assert_eq!(cohen_kappa(&[4, 4, 4], &[4, 4, 4]).unwrap(), 1.0);
}

#[test]
fn fluency_grand_mean_from_annotator_means() {
    let means = [3.76f64, 3.54, 3.80];
    let grand = means.iter().sum::<f64>() / 3.0;
    assert_eq!(format!("{grand:.2}"), "3.70");
}
