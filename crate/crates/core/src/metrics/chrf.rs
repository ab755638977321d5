use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_aligned, LengthMismatch};

pub const CHRF_ORDER: usize = 6;
pub const CHRF_BETA: f64 = 2.0;

/// Per-order character n-gram counts, summed over a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChrfStats {
    /// `(hyp_ngrams, ref_ngrams, matches)` for orders `1..=order`.
    pub orders: Vec<(u64, u64, u64)>,
}

impl ChrfStats {
    pub fn zero(order: usize) -> Self {
        ChrfStats {
            orders: vec![(0, 0, 0); order],
        }
    }

    pub fn sentence(hyp: &str, reference: &str, order: usize) -> Self {
        let h: Vec<char> = hyp.chars().filter(|c| !c.is_whitespace()).collect();
        let r: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
        let mut stats = Self::zero(order);
        for n in 1..=order {
            let hc = ngram_counts(&h, n);
            let rc = ngram_counts(&r, n);
            let matches = hc
                .iter()
                .map(|(g, &c)| c.min(rc.get(g).copied().unwrap_or(0)))
                .sum();
            stats.orders[n - 1] = (hc.values().sum(), rc.values().sum(), matches);
        }
        stats
    }

    pub fn accumulate(&mut self, other: &ChrfStats) {
        for (a, b) in self.orders.iter_mut().zip(&other.orders) {
            a.0 += b.0;
            a.1 += b.1;
            a.2 += b.2;
        }
    }

    /// Mean F-beta (0-100) over orders where both sides have n-grams.
    pub fn score(&self, beta: f64) -> f64 {
        let b2 = beta * beta;
        let mut total = 0.0;
        let mut effective = 0usize;
        for &(hyp, reference, matches) in &self.orders {
            if hyp == 0 || reference == 0 {
                continue;
            }
            effective += 1;
            let p = matches as f64 / hyp as f64;
            let r = matches as f64 / reference as f64;
            let denom = b2 * p + r;
            if denom > 0.0 {
                total += (1.0 + b2) * p * r / denom;
            }
        }
        if effective == 0 {
            0.0
        } else {
            100.0 * total / effective as f64
        }
    }
}

fn ngram_counts(chars: &[char], n: usize) -> BTreeMap<&[char], u64> {
    let mut counts = BTreeMap::new();
    if chars.len() >= n {
        for g in chars.windows(n) {
            *counts.entry(g).or_insert(0) += 1;
        }
    }
    counts
}

pub fn chrf_signature(order: usize, beta: f64) -> String {
    format!(
        "chrF|nrefs:1|case:mixed|nc:{order}|nw:0|beta:{beta}|space:no|version:{}",
        env!("CARGO_PKG_VERSION")
    )
}

/// Corpus chrF on the 0-100 scale.
pub fn chrf<S: AsRef<str>>(
    hyps: &[S],
    refs: &[S],
    char_order: usize,
    beta: f64,
) -> Result<f64, LengthMismatch> {
    check_aligned(hyps.len(), refs.len())?;
    let mut stats = ChrfStats::zero(char_order);
    for (h, r) in hyps.iter().zip(refs) {
        stats.accumulate(&ChrfStats::sentence(h.as_ref(), r.as_ref(), char_order));
    }
    Ok(stats.score(beta))
}
