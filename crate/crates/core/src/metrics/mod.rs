//! Corpus- and sentence-level MT metrics over a single reference.
//!
//! BLEU, chrF and TER aggregate integer sufficient statistics before the one
//! final floating-point combine, so corpus scores do not depend on sentence
//! order or on how the corpus was chunked. ROUGE-L and METEOR are sentence
//! means.

mod bleu;
mod chrf;
mod meteor;
mod report;
mod rouge;
mod ter;
mod tokenize;

pub use bleu::{
    bleu_corpus, bleu_from_precisions, bleu_signature, brevity_penalty, BleuError, BleuResult,
    BleuStats, PublishedBleu, MAX_ORDER,
};
pub use chrf::{chrf, chrf_signature, ChrfStats, CHRF_BETA, CHRF_ORDER};
pub use meteor::{meteor_lite, meteor_signature, MeteorTables};
pub use report::{evaluate_corpus, EvalError, MetricReport, ScoreColumns};
pub use rouge::{lcs_len, rouge_l, rouge_signature};
pub use ter::{edit_distance, ter, ter_signature, TerError, TerResult, MAX_SHIFT_DISTANCE, MAX_SHIFT_SIZE};
pub use tokenize::{tokenize_13a, TokenizedSentence, TOKENIZER_ID};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("hypothesis count {hyps} does not match reference count {refs}")]
pub struct LengthMismatch {
    pub hyps: usize,
    pub refs: usize,
}

pub(crate) fn check_aligned(hyps: usize, refs: usize) -> Result<(), LengthMismatch> {
    if hyps == refs {
        Ok(())
    } else {
        Err(LengthMismatch { hyps, refs })
    }
}
