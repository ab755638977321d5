use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use core::ops::{Add, AddAssign};
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::tokenize::{tokenize_13a, TOKENIZER_ID};
use super::{check_aligned, LengthMismatch};

pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum BleuError {
    #[error(transparent)]
    LengthMismatch(#[from] LengthMismatch),
    #[error("empty corpus")]
    Empty,
}

/// Sufficient statistics for corpus BLEU. Additive over sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BleuStats {
    pub clipped_matches: [u64; MAX_ORDER],
    pub hyp_ngrams: [u64; MAX_ORDER],
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuStats {
    /// Statistics of one tokenised hypothesis against one reference.
    pub fn sentence<S: Ord>(hyp: &[S], reference: &[S]) -> Self {
        let mut stats = BleuStats {
            hyp_len: hyp.len() as u64,
            ref_len: reference.len() as u64,
            ..Default::default()
        };
        for n in 1..=MAX_ORDER {
            if hyp.len() < n {
                continue;
            }
            let mut ref_counts: BTreeMap<&[S], u64> = BTreeMap::new();
            for g in reference.windows(n) {
                *ref_counts.entry(g).or_insert(0) += 1;
            }
            let mut hyp_counts: BTreeMap<&[S], u64> = BTreeMap::new();
            for g in hyp.windows(n) {
                *hyp_counts.entry(g).or_insert(0) += 1;
            }
            stats.hyp_ngrams[n - 1] = (hyp.len() + 1 - n) as u64;
            stats.clipped_matches[n - 1] = hyp_counts
                .iter()
                .map(|(g, &c)| c.min(ref_counts.get(g).copied().unwrap_or(0)))
                .sum();
        }
        stats
    }

    /// Modified n-gram precisions as fractions in [0, 1].
    pub fn precisions(&self) -> [f64; MAX_ORDER] {
        let mut p = [0.0; MAX_ORDER];
        for (i, out) in p.iter_mut().enumerate() {
            if self.hyp_ngrams[i] > 0 {
                *out = self.clipped_matches[i] as f64 / self.hyp_ngrams[i] as f64;
            }
        }
        p
    }

    pub fn brevity_penalty(&self) -> f64 {
        brevity_penalty(self.hyp_len, self.ref_len)
    }

    /// BLEU on the 0-100 scale. No smoothing: any zero precision gives 0.
    pub fn score(&self) -> f64 {
        let p = self.precisions();
        if p.iter().any(|&x| x <= 0.0) {
            return 0.0;
        }
        let log_mean = p.iter().map(|&x| libm::log(x)).sum::<f64>() / MAX_ORDER as f64;
        100.0 * self.brevity_penalty() * libm::exp(log_mean)
    }
}

impl Add for BleuStats {
    type Output = BleuStats;

    fn add(mut self, rhs: BleuStats) -> BleuStats {
        self += rhs;
        self
    }
}

impl AddAssign for BleuStats {
    fn add_assign(&mut self, rhs: BleuStats) {
        for i in 0..MAX_ORDER {
            self.clipped_matches[i] += rhs.clipped_matches[i];
            self.hyp_ngrams[i] += rhs.hyp_ngrams[i];
        }
        self.hyp_len += rhs.hyp_len;
        self.ref_len += rhs.ref_len;
    }
}

impl core::iter::Sum for BleuStats {
    fn sum<I: Iterator<Item = BleuStats>>(iter: I) -> Self {
        iter.fold(BleuStats::default(), Add::add)
    }
}

/// `1` when the hypothesis is longer than the reference, otherwise
/// `exp(1 - ref_len / hyp_len)`. An empty hypothesis gets 0.
pub fn brevity_penalty(hyp_len: u64, ref_len: u64) -> f64 {
    if hyp_len > ref_len {
        1.0
    } else if hyp_len == 0 {
        0.0
    } else {
        libm::exp(1.0 - ref_len as f64 / hyp_len as f64)
    }
}

/// BLEU (0-100) from percentage precisions and a brevity penalty.
pub fn bleu_from_precisions(precisions_pct: [f64; MAX_ORDER], bp: f64) -> f64 {
    if precisions_pct.iter().any(|&p| p <= 0.0) {
        return 0.0;
    }
    let log_mean = precisions_pct
        .iter()
        .map(|&p| libm::log(p / 100.0))
        .sum::<f64>()
        / MAX_ORDER as f64;
    100.0 * bp * libm::exp(log_mean)
}

pub fn bleu_signature() -> String {
    format!(
        "BLEU|nrefs:1|case:mixed|tok:{TOKENIZER_ID}|ngram:{MAX_ORDER}|version:{}",
        env!("CARGO_PKG_VERSION")
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuResult {
    pub score: f64,
    pub stats: BleuStats,
    pub signature: String,
}

/// Corpus BLEU against a single reference per hypothesis.
pub fn bleu_corpus<S: AsRef<str>>(hyps: &[S], refs: &[S]) -> Result<BleuResult, BleuError> {
    check_aligned(hyps.len(), refs.len())?;
    if hyps.is_empty() {
        return Err(BleuError::Empty);
    }
    let stats: BleuStats = hyps
        .iter()
        .zip(refs)
        .map(|(h, r)| {
            let h = tokenize_13a(h.as_ref());
            let r = tokenize_13a(r.as_ref());
            BleuStats::sentence(h.tokens(), r.tokens())
        })
        .sum();
    Ok(BleuResult {
        score: stats.score(),
        stats,
        signature: bleu_signature(),
    })
}

/// A published score line such as
/// `BLEU = 15.25 47.9/20.4/10.2/5.5 (BP=1.000 ratio=1.009 hyp_len=8142 ref_len=8068)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PublishedBleu {
    pub score: f64,
    pub precisions_pct: [f64; MAX_ORDER],
    pub bp: f64,
    pub ratio: f64,
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl PublishedBleu {
    /// BLEU recomputed from the rounded precisions and the printed BP.
    pub fn reconstructed_score(&self) -> f64 {
        bleu_from_precisions(self.precisions_pct, self.bp)
    }

    /// BP recomputed from the printed lengths.
    pub fn reconstructed_bp(&self) -> f64 {
        brevity_penalty(self.hyp_len, self.ref_len)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed BLEU score line: {0}")]
pub struct ParseBleuLineError(pub &'static str);

impl FromStr for PublishedBleu {
    type Err = ParseBleuLineError;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let rest = line
            .trim()
            .strip_prefix("BLEU")
            .and_then(|r| r.trim_start().strip_prefix('='))
            .ok_or(ParseBleuLineError("missing 'BLEU =' prefix"))?;
        let mut parts = rest.split_whitespace();
        let score = parse_f(parts.next(), "score")?;
        let prec_field = parts.next().ok_or(ParseBleuLineError("missing precisions"))?;
        let mut precisions_pct = [0.0; MAX_ORDER];
        let mut prec_iter = prec_field.split('/');
        for slot in precisions_pct.iter_mut() {
            *slot = parse_f(prec_iter.next(), "precision")?;
        }
        if prec_iter.next().is_some() {
            return Err(ParseBleuLineError("too many precisions"));
        }

        let (mut bp, mut ratio, mut hyp_len, mut ref_len) = (None, None, None, None);
        for field in parts {
            let field = field.trim_matches(|c| c == '(' || c == ')' || c == ',');
            let Some((key, value)) = field.split_once('=') else {
                continue;
            };
            match key {
                "BP" => bp = Some(parse_f(Some(value), "BP")?),
                "ratio" => ratio = Some(parse_f(Some(value), "ratio")?),
                "hyp_len" => {
                    hyp_len = Some(value.parse().map_err(|_| ParseBleuLineError("hyp_len"))?)
                }
                "ref_len" => {
                    ref_len = Some(value.parse().map_err(|_| ParseBleuLineError("ref_len"))?)
                }
                _ => {}
            }
        }
        Ok(PublishedBleu {
            score,
            precisions_pct,
            bp: bp.ok_or(ParseBleuLineError("missing BP"))?,
            ratio: ratio.ok_or(ParseBleuLineError("missing ratio"))?,
            hyp_len: hyp_len.ok_or(ParseBleuLineError("missing hyp_len"))?,
            ref_len: ref_len.ok_or(ParseBleuLineError("missing ref_len"))?,
        })
    }
}

fn parse_f(s: Option<&str>, what: &'static str) -> Result<f64, ParseBleuLineError> {
    s.and_then(|v| v.parse().ok()).ok_or(ParseBleuLineError(what))
}
