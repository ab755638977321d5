use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use lrmt_core::quality::{filter_by_threshold, stratified_sample};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{load, pretty_json, rebase_opt, rebase_path, to_json, Context, Outcome, Stage};
use crate::error::Failure;
use crate::http::RetryPolicy;
use crate::io::{escape_tsv, Format};
use crate::qa::{analyze, compact, corpus_scores, histogram_csv, score_pairs, ModelClient, ScoreOptions, HISTOGRAM_BINS};

fn default_batch() -> usize {
    ScoreOptions::default().batch_pairs
}

fn default_in_flight() -> usize {
    ScoreOptions::default().in_flight
}

fn default_thresholds() -> Vec<f64> {
    vec![0.3, 0.4, 0.5, 0.6]
}

fn default_bins() -> usize {
    HISTOGRAM_BINS
}

fn default_per_band() -> usize {
    10
}

fn default_seed() -> String {
    "lrmt".into()
}

/// Server URL from the flag, else from the environment.
pub(crate) fn server_url(flag: &Option<String>, ctx: &Context) -> Result<String, Failure> {
    flag.clone()
        .or_else(|| ctx.model_server.clone())
        .ok_or_else(|| Failure::usage(format!("no model server: pass --server or set {}", crate::qa::MODEL_SERVER_VAR)))
}

/// Attaches an embedding cosine score to every pair.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaScoreArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Model server base URL; falls back to the environment.
    #[arg(long)]
    #[serde(default)]
    pub server: Option<String>,
    /// Pairs per embedding request.
    #[arg(long, default_value_t = default_batch())]
    #[serde(default = "default_batch")]
    pub batch: usize,
    /// Requests in flight at once.
    #[arg(long, default_value_t = default_in_flight())]
    #[serde(default = "default_in_flight")]
    pub in_flight: usize,
    /// Recompute scores that are already present.
    #[arg(long)]
    #[serde(default)]
    pub rescore: bool,
    #[arg(long, default_value_t = 1000)]
    #[serde(default = "super::default_retry_base_ms")]
    pub retry_base_ms: u64,
    #[arg(long)]
    #[serde(default, skip_serializing)]
    pub json: bool,
}

impl Stage for QaScoreArgs {
    fn rebase(&mut self, base: &Path) {
        rebase_path(&mut self.input, base);
        rebase_path(&mut self.out, base);
    }

    fn inputs(&self) -> Vec<PathBuf> {
        vec![self.input.clone()]
    }

    fn declared_outputs(&self) -> Vec<PathBuf> {
        vec![self.out.clone()]
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, Failure> {
        let client = ModelClient::new(server_url(&self.server, ctx)?, RetryPolicy::with_base_ms(self.retry_base_ms));
        let corpus = load(&self.input)?;
        let opts = ScoreOptions {
            batch_pairs: self.batch,
            in_flight: self.in_flight,
            rescore: self.rescore,
        };
        let run = score_pairs(&corpus, &client, &opts);
        let mut out = Outcome::default()
            .count("scored", run.newly_scored)
            .count("already_scored", run.already_scored);
        // partial results are written too, so a rerun resumes where this stopped
        out.write_corpus(&run.corpus, &self.out)?;
        out.text = format!(
            "scored {} pairs ({} already scored)",
            run.newly_scored, run.already_scored
        );
        out.report = json!({
            "pairs": corpus.len(),
            "newly_scored": run.newly_scored,
            "already_scored": run.already_scored,
            "complete": run.error.is_none(),
        });
        if let Some(e) = run.error {
            return Err(Failure::external(format!(
                "{e}; {} partial scores saved to {}, rerun to resume",
                run.newly_scored,
                self.out.display()
            )));
        }
        Ok(out)
    }
}

/// Population statistics, retention curve and histogram of scores.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaAnalyzeArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    /// Ascending, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.4,0.5,0.6")]
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
    /// Histogram CSV destination.
    #[arg(long)]
    #[serde(default)]
    pub histogram: Option<PathBuf>,
    #[arg(long, default_value_t = HISTOGRAM_BINS)]
    #[serde(default = "default_bins")]
    pub bins: usize,
    /// Analysis report JSON destination.
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(default, skip_serializing)]
    pub json: bool,
}

impl Stage for QaAnalyzeArgs {
    fn rebase(&mut self, base: &Path) {
        rebase_path(&mut self.input, base);
        rebase_opt(&mut self.histogram, base);
        rebase_opt(&mut self.out, base);
    }

    fn inputs(&self) -> Vec<PathBuf> {
        vec![self.input.clone()]
    }

    fn declared_outputs(&self) -> Vec<PathBuf> {
        self.histogram.iter().chain(&self.out).cloned().collect()
    }

    fn run(&self, _ctx: &Context) -> Result<Outcome, Failure> {
        if self.bins == 0 {
            return Err(Failure::usage("--bins must be at least 1"));
        }
        let corpus = load(&self.input)?;
        let scores = corpus_scores(&corpus)?;
        // relative to the report so that the pair of files can move together
        let report_dir = self.out.as_ref().and_then(|o| o.parent()).unwrap_or(Path::new(""));
        let hist_name = self.histogram.as_ref().map(|p| {
            p.strip_prefix(report_dir).unwrap_or(p).display().to_string()
        });
        let report = analyze(&scores, &self.thresholds, hist_name)?;
        let mut out = Outcome::default().count("n", report.n);
        if let Some(path) = &self.histogram {
            out.write_file(path, histogram_csv(&scores, self.bins).as_bytes())?;
        }
        if let Some(path) = &self.out {
            out.write_file(path, pretty_json(&report).as_bytes())?;
        }
        let mut text = format!("n = {}  mean = {:.3}  std = {:.3} (population)", report.n, report.mean, report.std);
        for p in &report.curve {
            let _ = write!(
                text,
                "\n  score >= {}: {} kept ({:.1}%)",
                compact(p.threshold),
                p.retained,
                100.0 * p.retained_fraction
            );
        }
        out.text = text;
        out.report = to_json(&report);
        Ok(out)
    }
}

fn parse_band(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("band {s:?} must look like LOW:HIGH"))?;
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("band {s:?}: {e}"));
    Ok((parse(lo)?, parse(hi)?))
}

/// Seeded per-band sample of scored pairs for manual inspection.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaSampleArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    /// Comma-separated `LOW:HIGH` half-open bands.
    #[arg(long, value_delimiter = ',', value_parser = parse_band, required = true)]
    pub bands: Vec<(f64, f64)>,
    #[arg(long, default_value_t = 10)]
    #[serde(default = "default_per_band")]
    pub per_band: usize,
    #[arg(long, default_value = "lrmt")]
    #[serde(default = "default_seed")]
    pub seed: String,
    /// JSONL (or TSV by extension) with one row per sampled pair.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    #[serde(default, skip_serializing)]
    pub json: bool,
}

#[derive(Serialize)]
struct SampleRow<'a> {
    band: &'a str,
    id: &'a str,
    score: Option<f64>,
    source: &'a str,
    target: &'a str,
}

impl Stage for QaSampleArgs {
    fn rebase(&mut self, base: &Path) {
        rebase_path(&mut self.input, base);
        rebase_path(&mut self.out, base);
    }

    fn inputs(&self) -> Vec<PathBuf> {
        vec![self.input.clone()]
    }

    fn declared_outputs(&self) -> Vec<PathBuf> {
        vec![self.out.clone()]
    }

    fn run(&self, _ctx: &Context) -> Result<Outcome, Failure> {
        let corpus = load(&self.input)?;
        let sample = stratified_sample(&corpus, &self.bands, self.per_band, &self.seed)
            .map_err(|e| Failure::usage(e.to_string()))?;
        let mut body = String::new();
        let tsv = Format::from_path(&self.out) == Format::Tsv;
        for band in &sample.bands {
            for p in &band.pairs {
                if tsv {
                    let score = p.score.map(compact).unwrap_or_default();
                    let _ = writeln!(
                        body,
                        "{}\t{}\t{score}\t{}\t{}",
                        band.label,
                        p.id,
                        escape_tsv(&p.source_text),
                        escape_tsv(&p.target_text)
                    );
                } else {
                    let row = SampleRow {
                        band: &band.label,
                        id: &p.id,
                        score: p.score,
                        source: &p.source_text,
                        target: &p.target_text,
                    };
                    body.push_str(&serde_json::to_string(&row).expect("plain data serialises"));
                    body.push('\n');
                }
            }
        }
        let total: usize = sample.bands.iter().map(|b| b.pairs.len()).sum();
        let mut out = Outcome::default().count("sampled", total);
        out.write_file(&self.out, body.as_bytes())?;
        let mut text = String::new();
        for b in &sample.bands {
            let _ = writeln!(text, "{}: {} sampled of {} available", b.label, b.pairs.len(), b.available);
        }
        for w in &sample.warnings {
            let _ = writeln!(text, "warning: {w}");
        }
        out.text = text.trim_end().to_string();
        out.report = json!({
            "seed": self.seed,
            "bands": sample.bands.iter().map(|b| json!({
                "label": b.label, "low": b.low, "high": b.high,
                "available": b.available, "sampled": b.pairs.len(),
            })).collect::<Vec<_>>(),
            "warnings": sample.warnings,
        });
        Ok(out)
    }
}

/// Splits a scored corpus at a threshold (score >= threshold is kept).
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaFilterArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: f64,
    #[arg(long)]
    pub kept: PathBuf,
    #[arg(long)]
    #[serde(default)]
    pub dropped: Option<PathBuf>,
    #[arg(long)]
    #[serde(default, skip_serializing)]
    pub json: bool,
}

impl Stage for QaFilterArgs {
    fn rebase(&mut self, base: &Path) {
        rebase_path(&mut self.input, base);
        rebase_path(&mut self.kept, base);
        rebase_opt(&mut self.dropped, base);
    }

    fn inputs(&self) -> Vec<PathBuf> {
        vec![self.input.clone()]
    }

    fn declared_outputs(&self) -> Vec<PathBuf> {
        std::iter::once(&self.kept).chain(&self.dropped).cloned().collect()
    }

    fn run(&self, _ctx: &Context) -> Result<Outcome, Failure> {
        let corpus = load(&self.input)?;
        let (kept, dropped) =
            filter_by_threshold(&corpus, self.threshold).map_err(|e| Failure::validation(e.to_string()))?;
        let mut out = Outcome::default().count("kept", kept.len()).count("dropped", dropped.len());
        out.write_corpus(&kept, &self.kept)?;
        if let Some(path) = &self.dropped {
            out.write_corpus(&dropped, path)?;
        }
        out.text = format!("kept {} / dropped {} at score >= {}", kept.len(), dropped.len(), compact(self.threshold));
        out.report = json!({ "threshold": self.threshold, "kept": kept.len(), "dropped": dropped.len() });
        Ok(out)
    }
}
