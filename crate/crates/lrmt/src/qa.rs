//! Model-server client and embedding-similarity scoring.

use std::fmt::Write as _;
use std::thread;

use lrmt_core::quality::{cosine, histogram, population_stats, retention_curve, HistogramBin, RetentionPoint};
use lrmt_core::Corpus;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Failure;
use crate::http::{self, Exhausted, RetryPolicy};

/// Environment variable naming the model server base URL.
pub const MODEL_SERVER_VAR: &str = "MODEL_SERVER_URL";

/// The server rejects larger requests.
pub const MAX_TEXTS_PER_REQUEST: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedResponse {
    pub vectors: Vec<Vec<f64>>,
    pub dim: usize,
    pub model_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CometResponse {
    pub scores: Vec<f64>,
    pub model_id: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("model server: {0}")]
    Unreachable(String),
    #[error("model server protocol violation: {0}")]
    Protocol(String),
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::external(e.to_string())
    }
}

impl From<Exhausted> for ModelError {
    fn from(e: Exhausted) -> Self {
        ModelError::Unreachable(e.to_string())
    }
}

/// Sentence embedding provider.
pub trait Embedder: Sync {
    /// One vector per text, all of the same length.
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ModelError>;
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Serialize)]
struct CometRequest<'a> {
    sources: &'a [String],
    hypotheses: &'a [String],
    references: &'a [String],
}

pub struct ModelClient {
    base: String,
    agent: ureq::Agent,
    retry: RetryPolicy,
}

impl ModelClient {
    pub fn new(base: impl Into<String>, retry: RetryPolicy) -> Self {
        ModelClient {
            base: base.into(),
            agent: http::agent(),
            retry,
        }
    }

    pub fn health(&self) -> Result<Value, ModelError> {
        let url = http::endpoint(&self.base, "health");
        Ok(http::request_json::<(), Value>(&self.agent, &url, None, None, self.retry)?.value)
    }

    pub fn embed_raw(&self, texts: &[String]) -> Result<EmbedResponse, ModelError> {
        let url = http::endpoint(&self.base, "embed");
        let body = EmbedRequest { texts };
        let reply: EmbedResponse =
            http::request_json(&self.agent, &url, None, Some(&body), self.retry)?.value;
        if reply.vectors.len() != texts.len() {
            return Err(ModelError::Protocol(format!(
                "{} vectors for {} texts",
                reply.vectors.len(),
                texts.len()
            )));
        }
        if let Some(v) = reply.vectors.iter().find(|v| v.len() != reply.dim) {
            return Err(ModelError::Protocol(format!(
                "vector of length {} but dim is {}",
                v.len(),
                reply.dim
            )));
        }
        Ok(reply)
    }

    pub fn comet(
        &self,
        sources: &[String],
        hypotheses: &[String],
        references: &[String],
    ) -> Result<CometResponse, ModelError> {
        let url = http::endpoint(&self.base, "comet");
        let body = CometRequest {
            sources,
            hypotheses,
            references,
        };
        let reply: CometResponse =
            http::request_json(&self.agent, &url, None, Some(&body), self.retry)?.value;
        if reply.scores.len() != sources.len() {
            return Err(ModelError::Protocol(format!(
                "{} scores for {} triples",
                reply.scores.len(),
                sources.len()
            )));
        }
        Ok(reply)
    }
}

impl Embedder for ModelClient {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ModelError> {
        Ok(self.embed_raw(texts)?.vectors)
    }
}

#[derive(Debug, Clone)]
pub struct ScoreOptions {
    /// Pairs per request; each pair contributes two texts.
    pub batch_pairs: usize,
    pub in_flight: usize,
    /// Re-embed pairs that already carry a score.
    pub rescore: bool,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            batch_pairs: 128,
            in_flight: 4,
            rescore: false,
        }
    }
}

/// Result of a scoring pass. On error, `corpus` still carries every score
/// from batches that completed, so a rerun only embeds the rest.
#[derive(Debug, Clone)]
pub struct ScoreRun {
    pub corpus: Corpus,
    pub newly_scored: usize,
    pub already_scored: usize,
    pub error: Option<ModelError>,
}

fn score_batch(embedder: &dyn Embedder, corpus: &Corpus, batch: &[usize]) -> Result<Vec<f64>, ModelError> {
    let mut texts: Vec<String> = batch.iter().map(|&i| corpus.pairs()[i].source_text.clone()).collect();
    texts.extend(batch.iter().map(|&i| corpus.pairs()[i].target_text.clone()));
    let vectors = embedder.embed(&texts)?;
    if vectors.len() != texts.len() {
        return Err(ModelError::Protocol(format!(
            "{} vectors for {} texts",
            vectors.len(),
            texts.len()
        )));
    }
    let (src, tgt) = vectors.split_at(batch.len());
    src.iter()
        .zip(tgt)
        .map(|(u, v)| cosine(u, v).map_err(|e| ModelError::Protocol(e.to_string())))
        .collect()
}

/// Scores every unscored pair (every pair with `rescore`) by the cosine of
/// its source and target embeddings.
pub fn score_pairs(corpus: &Corpus, embedder: &dyn Embedder, opts: &ScoreOptions) -> ScoreRun {
    let todo: Vec<usize> = (0..corpus.len())
        .filter(|&i| opts.rescore || corpus.pairs()[i].score.is_none())
        .collect();
    let batch_pairs = opts.batch_pairs.clamp(1, MAX_TEXTS_PER_REQUEST / 2);
    let batches: Vec<&[usize]> = todo.chunks(batch_pairs).collect();
    let mut out = corpus.clone();
    let mut run = ScoreRun {
        corpus: Corpus::empty(""),
        newly_scored: 0,
        already_scored: corpus.len() - todo.len(),
        error: None,
    };
    for wave in batches.chunks(opts.in_flight.max(1)) {
        let results: Vec<Result<Vec<f64>, ModelError>> = thread::scope(|s| {
            let handles: Vec<_> = wave
                .iter()
                .map(|batch| s.spawn(|| score_batch(embedder, corpus, batch)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("scoring thread panicked")).collect()
        });
        for (batch, result) in wave.iter().zip(results) {
            match result {
                Ok(scores) => {
                    for (&i, s) in batch.iter().zip(scores) {
                        out.set_score(i, s).expect("cosine is within [-1, 1]");
                    }
                    run.newly_scored += batch.len();
                }
                Err(e) => {
                    run.error.get_or_insert(e);
                }
            }
        }
        if run.error.is_some() {
            break;
        }
    }
    run.corpus = out;
    run
}

/// Scores of every pair, or the id of the first unscored one.
pub fn corpus_scores(corpus: &Corpus) -> Result<Vec<f64>, Failure> {
    corpus
        .pairs()
        .iter()
        .map(|p| {
            p.score
                .ok_or_else(|| Failure::validation(format!("pair {} has no score", p.id)))
        })
        .collect()
}

/// Machine-readable result of `qa analyze`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    /// Always `"population"`: the denominator is n.
    pub std_kind: String,
    pub curve: Vec<RetentionPoint>,
    pub histogram_path: Option<String>,
}

pub fn analyze(scores: &[f64], thresholds: &[f64], histogram_path: Option<String>) -> Result<AnalysisReport, Failure> {
    let stats = population_stats(scores).map_err(|e| Failure::validation(e.to_string()))?;
    let curve = retention_curve(scores, thresholds).map_err(|e| Failure::validation(e.to_string()))?;
    Ok(AnalysisReport {
        n: stats.n,
        mean: stats.mean,
        std: stats.std,
        std_kind: "population".into(),
        curve: curve.points,
        histogram_path,
    })
}

/// Formats a float compactly and stably: 12 decimals, trailing zeros
/// stripped.
pub fn compact(x: f64) -> String {
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

pub const HISTOGRAM_BINS: usize = 50;

pub fn histogram_csv(scores: &[f64], bins: usize) -> String {
    let mut out = String::from("bin_low,bin_high,count\n");
    for HistogramBin { low, high, count } in histogram(scores, bins, -1.0, 1.0) {
        let _ = writeln!(out, "{},{},{}", compact(low), compact(high), count);
    }
    out
}
