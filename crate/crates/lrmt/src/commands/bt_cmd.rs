use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use lrmt_core::bt::{BtJob, DEFAULT_BATCH_SIZE, DEFAULT_INSTRUCTION};
use lrmt_core::text::normalize_text;
use lrmt_core::LanguageTag;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{rebase_opt, rebase_path, Context, Outcome, Stage};
use crate::bt::{run_job, HttpProvider, RunOptions};
use crate::error::Failure;
use crate::http::RetryPolicy;
use crate::io::read_lines;

fn default_batch() -> usize {
    DEFAULT_BATCH_SIZE
}

fn default_concurrency() -> usize {
    4
}

/// Translates a sentence file through the provider, resumably.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BtRunArgs {
    /// One source sentence per line.
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BATCH_SIZE)]
    #[serde(default = "default_batch")]
    pub batch: usize,
    /// System instruction file; a built-in English-to-Kokborok prompt
    /// otherwise.
    #[arg(long)]
    #[serde(default)]
    pub instruction: Option<PathBuf>,
    #[arg(long)]
    pub provider_url: String,
    /// Defaults to `<out>.checkpoint.jsonl`.
    #[arg(long)]
    #[serde(default)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    #[arg(long, default_value = "eng_Latn")]
    #[serde(default = "super::default_src_lang")]
    pub src_lang: String,
    #[arg(long, default_value = "trp_Latn")]
    #[serde(default = "super::default_tgt_lang")]
    pub tgt_lang: String,
    /// First backoff delay; doubles per retry.
    #[arg(long, default_value_t = 1000)]
    #[serde(default = "super::default_retry_base_ms")]
    pub retry_base_ms: u64,
    #[arg(long)]
    #[serde(default, skip_serializing)]
    pub json: bool,
}

impl BtRunArgs {
    pub fn checkpoint_path(&self) -> PathBuf {
        self.checkpoint.clone().unwrap_or_else(|| {
            let mut p = self.out.as_os_str().to_owned();
            p.push(".checkpoint.jsonl");
            PathBuf::from(p)
        })
    }

    pub fn job(&self) -> Result<BtJob, Failure> {
        let system_instruction = match &self.instruction {
            Some(p) => fs::read_to_string(p)
                .map_err(|e| Failure::external(format!("cannot read {}: {e}", p.display())))?
                .trim()
                .to_string(),
            None => DEFAULT_INSTRUCTION.to_string(),
        };
        let lang = |tag: &str| LanguageTag::new(tag).map_err(|e| Failure::usage(e.to_string()));
        let job = BtJob {
            source_sentences: read_lines(&self.input)?.iter().map(|l| normalize_text(l)).collect(),
            system_instruction,
            batch_size: self.batch,
            source_lang: lang(&self.src_lang)?,
            target_lang: lang(&self.tgt_lang)?,
            checkpoint_path: self.checkpoint_path().display().to_string(),
        };
        job.validate().map_err(|e| Failure::validation(e.to_string()))?;
        Ok(job)
    }
}

impl Stage for BtRunArgs {
    fn rebase(&mut self, base: &Path) {
        rebase_path(&mut self.input, base);
        rebase_path(&mut self.out, base);
        rebase_opt(&mut self.instruction, base);
        rebase_opt(&mut self.checkpoint, base);
    }

    fn inputs(&self) -> Vec<PathBuf> {
        let mut v = vec![self.input.clone()];
        v.extend(self.instruction.iter().cloned());
        v
    }

    fn declared_outputs(&self) -> Vec<PathBuf> {
        vec![self.out.clone()]
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, Failure> {
        let job = self.job()?;
        let provider = HttpProvider::new(
            self.provider_url.clone(),
            ctx.provider_key.clone(),
            RetryPolicy::with_base_ms(self.retry_base_ms),
        );
        let opts = RunOptions {
            concurrency: self.concurrency,
            ..RunOptions::default()
        };
        let summary = run_job(&job, &provider, &opts, ctx.cancel)?;
        let corpus = summary.corpus.with_name("synthetic");
        let mut out = Outcome::default()
            .count("sentences", job.source_sentences.len())
            .count("translated", corpus.len())
            .count("failed", summary.failed_sentences.len());
        out.write_corpus(&corpus, &self.out)?;
        out.text = format!(
            "{} of {} sentences translated ({} failed); {} provider requests this run, {} in total",
            corpus.len(),
            job.source_sentences.len(),
            summary.failed_sentences.len(),
            summary.requests_this_run,
            summary.cost.requests,
        );
        out.report = json!({
            "sentences": job.source_sentences.len(),
            "translated": corpus.len(),
            "failed_sentences": summary.failed_sentences,
            "batches": summary.records.len(),
            "resumed_batches": summary.resumed_batches,
            "requests_this_run": summary.requests_this_run,
            "cost": summary.cost,
            "output": out.corpora[0],
        });
        Ok(out)
    }
}
