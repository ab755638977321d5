use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::bleu::{bleu_signature, BleuStats, MAX_ORDER};
use super::chrf::{chrf_signature, ChrfStats, CHRF_BETA, CHRF_ORDER};
use super::meteor::{meteor_lite, meteor_signature, MeteorTables};
use super::rouge::{rouge_l, rouge_signature};
use super::ter::{ter, ter_signature, TerError};
use super::tokenize::tokenize_13a;
use super::{check_aligned, LengthMismatch};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    LengthMismatch(#[from] LengthMismatch),
    #[error("empty corpus")]
    Empty,
    #[error("reference {index} is empty")]
    EmptyReference { index: usize },
    #[error("{column} has {got} scores for {expected} sentences")]
    ScoreCount {
        column: &'static str,
        got: usize,
        expected: usize,
    },
}

/// Externally computed per-sentence scores (e.g. from a model server).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreColumns {
    #[serde(default)]
    pub cosine: Option<Vec<f64>>,
    #[serde(default)]
    pub comet: Option<Vec<f64>>,
}

/// All automatic metrics for one system output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub sentences: usize,
    pub bleu: f64,
    /// Percentages.
    pub precisions: [f64; MAX_ORDER],
    pub bp: f64,
    pub hyp_len: u64,
    pub ref_len: u64,
    pub chrf: f64,
    /// Percentage (edits per 100 reference words).
    pub ter: f64,
    pub rouge_l: f64,
    pub meteor: f64,
    pub cos_sim: Option<f64>,
    pub comet: Option<f64>,
    pub signature: String,
    pub metric_signatures: Vec<String>,
    pub bleu_stats: BleuStats,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn column_mean(
    column: &'static str,
    values: &Option<Vec<f64>>,
    expected: usize,
) -> Result<Option<f64>, EvalError> {
    match values {
        None => Ok(None),
        Some(v) if v.len() != expected => Err(EvalError::ScoreCount {
            column,
            got: v.len(),
            expected,
        }),
        Some(v) => Ok(Some(mean(v))),
    }
}

/// Evaluates a system output against single references.
pub fn evaluate_corpus<S: AsRef<str>>(
    hyps: &[S],
    refs: &[S],
    scores: &ScoreColumns,
    meteor_tables: &MeteorTables,
) -> Result<MetricReport, EvalError> {
    check_aligned(hyps.len(), refs.len())?;
    let n = hyps.len();
    if n == 0 {
        return Err(EvalError::Empty);
    }

    let mut bleu_stats = BleuStats::default();
    let mut chrf_stats = ChrfStats::zero(CHRF_ORDER);
    let (mut ter_edits, mut ter_ref_len) = (0u64, 0u64);
    let mut rouge_sum = 0.0;
    let mut meteor_sum = 0.0;

    for (index, (h, r)) in hyps.iter().zip(refs).enumerate() {
        let (h, r) = (h.as_ref(), r.as_ref());
        let ht = tokenize_13a(h);
        let rt = tokenize_13a(r);
        bleu_stats += BleuStats::sentence(ht.tokens(), rt.tokens());
        chrf_stats.accumulate(&ChrfStats::sentence(h, r, CHRF_ORDER));
        let t = ter(&ht, &rt).map_err(|e| match e {
            TerError::EmptyReference => EvalError::EmptyReference { index },
        })?;
        ter_edits += t.edits;
        ter_ref_len += t.ref_len;
        rouge_sum += rouge_l(&ht, &rt);
        meteor_sum += meteor_lite(&ht, &rt, meteor_tables);
    }

    let precisions = bleu_stats.precisions().map(|p| 100.0 * p);
    Ok(MetricReport {
        sentences: n,
        bleu: bleu_stats.score(),
        precisions,
        bp: bleu_stats.brevity_penalty(),
        hyp_len: bleu_stats.hyp_len,
        ref_len: bleu_stats.ref_len,
        chrf: chrf_stats.score(CHRF_BETA),
        ter: 100.0 * ter_edits as f64 / ter_ref_len as f64,
        rouge_l: rouge_sum / n as f64,
        meteor: meteor_sum / n as f64,
        cos_sim: column_mean("cosine", &scores.cosine, n)?,
        comet: column_mean("comet", &scores.comet, n)?,
        signature: bleu_signature(),
        metric_signatures: alloc::vec![
            chrf_signature(CHRF_ORDER, CHRF_BETA),
            ter_signature(),
            rouge_signature(),
            meteor_signature(meteor_tables),
        ],
        bleu_stats,
    })
}
