//! Embedding-similarity analysis: score statistics, retention curves,
//! threshold filtering and stratified inspection samples.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, SentencePair};
use crate::hashkey::hash_order;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QualityError {
    #[error("no scores")]
    Empty,
    #[error("embedding dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("pair {0} has no similarity score")]
    Unscored(String),
    #[error("thresholds must be sorted ascending")]
    UnsortedThresholds,
    #[error("bands overlap or are inverted: [{0}, {1})")]
    BadBand(f64, f64),
}

/// `u·v / (‖u‖‖v‖)`, clamped to [-1, 1]. A zero vector has similarity 0.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, QualityError> {
    if u.len() != v.len() {
        return Err(QualityError::DimensionMismatch(u.len(), v.len()));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = libm::sqrt(u.iter().map(|a| a * a).sum());
    let nv = libm::sqrt(v.iter().map(|b| b * b).sum());
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorePopulation {
    #[serde(skip)]
    pub scores: Vec<f64>,
    pub n: usize,
    pub mean: f64,
    /// Population standard deviation (N denominator).
    pub std: f64,
}

/// Neumaier-compensated sum.
fn compensated_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = sum + x;
        if libm::fabs(sum) >= libm::fabs(x) {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Mean and population standard deviation (two passes, compensated sums).
pub fn population_stats(scores: &[f64]) -> Result<ScorePopulation, QualityError> {
    if scores.is_empty() {
        return Err(QualityError::Empty);
    }
    let n = scores.len();
    let mean = compensated_sum(scores.iter().copied()) / n as f64;
    let var = compensated_sum(scores.iter().map(|s| (s - mean) * (s - mean))) / n as f64;
    Ok(ScorePopulation {
        scores: scores.to_vec(),
        n,
        mean,
        std: libm::sqrt(var),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetentionPoint {
    pub threshold: f64,
    pub retained: usize,
    pub retained_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetentionCurve {
    pub n: usize,
    pub points: Vec<RetentionPoint>,
}

/// Fraction of scores `>= t` for each threshold.
pub fn retention_curve(scores: &[f64], thresholds: &[f64]) -> Result<RetentionCurve, QualityError> {
    if scores.is_empty() {
        return Err(QualityError::Empty);
    }
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(QualityError::UnsortedThresholds);
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let points = thresholds
        .iter()
        .map(|&t| {
            let below = sorted.partition_point(|&s| s < t);
            let retained = n - below;
            RetentionPoint {
                threshold: t,
                retained,
                retained_fraction: retained as f64 / n as f64,
            }
        })
        .collect();
    Ok(RetentionCurve { n, points })
}

/// Splits a scored corpus into pairs with `score >= threshold` and the rest.
pub fn filter_by_threshold(corpus: &Corpus, threshold: f64) -> Result<(Corpus, Corpus), QualityError> {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for p in corpus.pairs() {
        let s = p.score.ok_or_else(|| QualityError::Unscored(p.id.clone()))?;
        if s >= threshold {
            kept.push(p.clone());
        } else {
            dropped.push(p.clone());
        }
    }
    Ok((
        Corpus::from_valid(corpus.name().into(), kept),
        Corpus::from_valid(format!("{}.dropped", corpus.name()), dropped),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

/// Equal-width bins over `[low, high]`; the last bin includes `high`.
/// Scores outside the range are clamped into the edge bins.
pub fn histogram(scores: &[f64], bins: usize, low: f64, high: f64) -> Vec<HistogramBin> {
    let width = (high - low) / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin {
            low: low + i as f64 * width,
            high: if i + 1 == bins { high } else { low + (i + 1) as f64 * width },
            count: 0,
        })
        .collect();
    for &s in scores {
        let mut idx = libm::floor((s - low) / width);
        if idx < 0.0 {
            idx = 0.0;
        }
        let mut i = (idx as usize).min(bins - 1);
        // floor of a rounded quotient can land one bin off near an edge
        while i > 0 && s < out[i].low {
            i -= 1;
        }
        while i + 1 < bins && s >= out[i + 1].low {
            i += 1;
        }
        out[i].count += 1;
    }
    out
}

/// Pairs drawn from one score band `[low, high)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandSample {
    pub low: f64,
    pub high: f64,
    pub label: String,
    /// Pairs in the band before sampling.
    pub available: usize,
    pub pairs: Vec<SentencePair>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratifiedSample {
    pub bands: Vec<BandSample>,
    pub warnings: Vec<String>,
}

impl StratifiedSample {
    pub fn to_corpus(&self, name: &str) -> Corpus {
        let pairs = self.bands.iter().flat_map(|b| b.pairs.iter().cloned()).collect();
        Corpus::from_valid(name.into(), pairs)
    }
}

/// Up to `per_band` pairs per band, chosen by the seeded hash-sort on source
/// text. Unscored pairs are ignored.
pub fn stratified_sample(
    corpus: &Corpus,
    bands: &[(f64, f64)],
    per_band: usize,
    seed: &str,
) -> Result<StratifiedSample, QualityError> {
    let mut sorted_bands = bands.to_vec();
    sorted_bands.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (i, &(lo, hi)) in sorted_bands.iter().enumerate() {
        if !(lo < hi) || sorted_bands.get(i + 1).is_some_and(|next| next.0 < hi) {
            return Err(QualityError::BadBand(lo, hi));
        }
    }

    let mut out = StratifiedSample {
        bands: Vec::new(),
        warnings: Vec::new(),
    };
    for &(low, high) in bands {
        let label = format!("[{low}, {high})");
        let members: Vec<&SentencePair> = corpus
            .pairs()
            .iter()
            .filter(|p| p.score.is_some_and(|s| s >= low && s < high))
            .collect();
        let order = hash_order(seed, &members, |p| &p.source_text, |p| &p.id);
        let pairs: Vec<SentencePair> = order
            .into_iter()
            .take(per_band)
            .map(|i| members[i].clone())
            .collect();
        if pairs.len() < per_band {
            out.warnings.push(format!(
                "band {label}: {} of {per_band} requested pairs available",
                pairs.len()
            ));
        }
        out.bands.push(BandSample {
            low,
            high,
            label,
            available: members.len(),
            pairs,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_util::pair;
    use crate::lang::Origin;
    use alloc::vec;
    use proptest::prelude::*;

    fn scored(scores: &[f64]) -> Corpus {
        let pairs = scores
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let mut p = pair(&format!("synthetic:{i}"), &format!("s{i}"), "t", Origin::Synthetic);
                p.score = Some(s);
                p
            })
            .collect();
        Corpus::new("scored", pairs).unwrap()
    }

    #[test]
    fn cosine_basics() {
        assert!((cosine(&[1.0, 2.0], &[1.0, 2.0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 3.0]).unwrap(), 0.0);
        assert!(matches!(cosine(&[1.0], &[1.0, 2.0]), Err(QualityError::DimensionMismatch(1, 2))));
        // (1,2,2)·(2,1,2) = 8; both norms 3
        assert!((cosine(&[1.0, 2.0, 2.0], &[2.0, 1.0, 2.0]).unwrap() - 8.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn stats_by_hand() {
        let s = population_stats(&[0.5, 0.5, 0.5]).unwrap();
        assert_eq!((s.mean, s.std), (0.5, 0.0));
        let s = population_stats(&[0.0, 1.0]).unwrap();
        assert_eq!((s.mean, s.std), (0.5, 0.5));
        // deviations -0.2,-0.1,0,0.3 -> squares sum 0.14 -> /4 = 0.035
        let s = population_stats(&[0.1, 0.2, 0.3, 0.6]).unwrap();
        assert!((s.mean - 0.3).abs() < 1e-12);
        assert!((s.std - libm::sqrt(0.035)).abs() < 1e-12);
        assert!((s.std - 0.18708).abs() < 1e-5);
        assert_eq!(population_stats(&[]), Err(QualityError::Empty));
    }

    #[test]
    fn retention_by_hand() {
        let scores = [0.1, 0.2, 0.35, 0.5, 0.9];
        let c = retention_curve(&scores, &[0.0, 0.3, 0.95]).unwrap();
        let f: Vec<f64> = c.points.iter().map(|p| p.retained_fraction).collect();
        assert_eq!(f, [1.0, 0.6, 0.0]);
        assert_eq!(retention_curve(&scores, &[0.5, 0.3]), Err(QualityError::UnsortedThresholds));
    }

    #[test]
    fn threshold_filter_inclusive() {
        let c = scored(&[0.1, 0.2, 0.35, 0.5, 0.9]);
        let (kept, dropped) = filter_by_threshold(&c, 0.5).unwrap();
        let kept_scores: Vec<f64> = kept.pairs().iter().map(|p| p.score.unwrap()).collect();
        assert_eq!(kept_scores, [0.5, 0.9]);
        assert_eq!(dropped.len(), 3);
        assert_eq!(filter_by_threshold(&c, -1.0).unwrap().0.len(), 5);
        assert!(filter_by_threshold(&c, 0.95).unwrap().0.is_empty());
    }

    #[test]
    fn unscored_pair_named() {
        let c = Corpus::new("c", vec![pair("x:1", "a", "b", Origin::Synthetic)]).unwrap();
        assert_eq!(filter_by_threshold(&c, 0.0).unwrap_err(), QualityError::Unscored("x:1".into()));
    }

    #[test]
    fn histogram_edges() {
        let h = histogram(&[-1.0, -0.96, 0.0, 1.0, 0.999], 50, -1.0, 1.0);
        assert_eq!(h.len(), 50);
        assert_eq!(h[0].count, 1);
        assert_eq!(h[1].count, 1);
        assert_eq!(h[25].count, 1);
        assert_eq!(h[49].count, 2);
        assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), 5);
    }

    #[test]
    fn sample_within_bands() {
        let c = scored(&[0.01, 0.02, 0.05, 0.11, 0.12, 0.15, 0.18, 0.3, 0.5, 0.9]);
        let s = stratified_sample(&c, &[(0.0, 0.1), (0.1, 0.2)], 2, "seed").unwrap();
        for b in &s.bands {
            assert!(b.pairs.len() <= 2);
            assert!(b.pairs.iter().all(|p| {
                let x = p.score.unwrap();
                x >= b.low && x < b.high
            }));
        }
        assert_eq!(s, stratified_sample(&c, &[(0.0, 0.1), (0.1, 0.2)], 2, "seed").unwrap());
        assert!(s.warnings.is_empty());

        let empty = stratified_sample(&c, &[(-1.0, -0.5)], 2, "seed").unwrap();
        assert!(empty.bands[0].pairs.is_empty());
        assert_eq!(empty.warnings.len(), 1);

        assert!(stratified_sample(&c, &[(0.0, 0.2), (0.1, 0.3)], 2, "s").is_err());
    }

    proptest! {
        #[test]
        fn curve_agrees_with_filter(scores in proptest::collection::vec(-1.0f64..=1.0, 1..50), t in -1.2f64..1.2) {
            let c = scored(&scores);
            let curve = retention_curve(&scores, &[t]).unwrap();
            let (kept, _) = filter_by_threshold(&c, t).unwrap();
            prop_assert_eq!(curve.points[0].retained, kept.len());
        }
    }
}
