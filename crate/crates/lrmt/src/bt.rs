//! Back-translation job runner: HTTP provider, JSONL checkpoint, resume.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use lrmt_core::bt::{
    cost_report, plan_batches, translate_with_bisection, BatchRecord, BtJob, BtJobError,
    CostReport, MAX_ATTEMPTS,
};
use lrmt_core::{Corpus, Origin, SentencePair};
use serde::{Deserialize, Serialize};

use crate::error::Failure;
use crate::http::{self, Exhausted, RetryPolicy};

/// Environment variable holding the provider bearer token.
pub const PROVIDER_KEY_VAR: &str = "BT_PROVIDER_KEY";

/// Lines returned for one logical request, and how many HTTP requests
/// (including retries) it took.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProviderReply {
    pub lines: Vec<String>,
    pub requests: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    #[error("provider failed: {0}")]
    Failed(String),
}

/// Anything that can translate a list of lines under a system instruction.
pub trait Provider: Sync {
    fn translate(&self, system: &str, lines: &[String]) -> Result<ProviderReply, ProviderError>;
}

#[derive(Serialize)]
struct ProviderRequest<'a> {
    system: &'a str,
    lines: &'a [String],
}

#[derive(Deserialize)]
struct ProviderResponse {
    lines: Vec<String>,
}

/// The HTTP provider contract: `POST {"system", "lines"}` answering
/// `{"lines"}`, optionally authenticated with a bearer token.
pub struct HttpProvider {
    url: String,
    key: Option<String>,
    agent: ureq::Agent,
    retry: RetryPolicy,
}

impl HttpProvider {
    pub fn new(url: impl Into<String>, key: Option<String>, retry: RetryPolicy) -> Self {
        HttpProvider {
            url: url.into(),
            key,
            agent: http::agent(),
            retry,
        }
    }

    /// Reads the token from [`PROVIDER_KEY_VAR`].
    pub fn from_env(url: impl Into<String>, retry: RetryPolicy) -> Self {
        let key = std::env::var(PROVIDER_KEY_VAR).ok().filter(|k| !k.is_empty());
        HttpProvider::new(url, key, retry)
    }
}

impl Provider for HttpProvider {
    fn translate(&self, system: &str, lines: &[String]) -> Result<ProviderReply, ProviderError> {
        let body = ProviderRequest { system, lines };
        match http::request_json::<_, ProviderResponse>(
            &self.agent,
            &self.url,
            self.key.as_deref(),
            Some(&body),
            self.retry,
        ) {
            Ok(reply) => Ok(ProviderReply {
                lines: reply.value.lines,
                requests: reply.requests,
            }),
            Err(Exhausted { requests, last }) => Err(ProviderError::Failed(format!(
                "{} after {requests} requests",
                last
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Batches in flight at once.
    pub concurrency: usize,
    /// Tries per isolated sentence before it is marked failed.
    pub sentence_attempts: u32,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            concurrency: 4,
            sentence_attempts: MAX_ATTEMPTS,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Job(#[from] BtJobError),
    #[error("checkpoint {path} line {line} is corrupt ({reason}); refusing to resume")]
    CorruptCheckpoint { path: String, line: usize, reason: String },
    #[error("checkpoint batch {batch} does not match this job; refusing to resume")]
    CheckpointMismatch { batch: usize },
    #[error("checkpoint I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("batch {batch}: {source}; {completed} batches are checkpointed, rerun to resume")]
    Provider {
        batch: usize,
        source: ProviderError,
        completed: usize,
    },
    #[error("cancelled; {completed} batches are checkpointed, rerun to resume")]
    Cancelled { completed: usize },
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Job(_) | RunError::CorruptCheckpoint { .. } | RunError::CheckpointMismatch { .. } => {
                Failure::validation(e.to_string())
            }
            _ => Failure::external(e.to_string()),
        }
    }
}

/// A finished job.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub corpus: Corpus,
    /// Indices (into the job's sentences) that could not be translated.
    pub failed_sentences: Vec<usize>,
    pub records: Vec<BatchRecord>,
    pub cost: CostReport,
    /// Provider requests issued by this invocation only.
    pub requests_this_run: u64,
    pub resumed_batches: usize,
}

/// Loads checkpoint records keyed by batch index. Any unparsable line,
/// inconsistent record or repeated batch counts as corruption.
pub fn load_checkpoint(path: &Path) -> Result<BTreeMap<usize, BatchRecord>, RunError> {
    let mut records = BTreeMap::new();
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(records),
        Err(e) => return Err(e.into()),
    };
    let corrupt = |line: usize, reason: String| RunError::CorruptCheckpoint {
        path: path.display().to_string(),
        line,
        reason,
    };
    if !text.is_empty() && !text.ends_with('\n') {
        return Err(corrupt(text.lines().count(), "truncated final record".into()));
    }
    for (i, line) in text.lines().enumerate() {
        let record: BatchRecord =
            serde_json::from_str(line).map_err(|e| corrupt(i + 1, e.to_string()))?;
        if !record.is_terminal() || !record.is_consistent() {
            return Err(corrupt(i + 1, "record is not a consistent finished batch".into()));
        }
        let index = record.batch_index;
        if records.insert(index, record).is_some() {
            return Err(corrupt(i + 1, format!("batch {index} appears twice")));
        }
    }
    Ok(records)
}

struct Shared<'a> {
    job: &'a BtJob,
    provider: &'a dyn Provider,
    opts: &'a RunOptions,
    pending: Vec<BatchRecord>,
    next: AtomicUsize,
    stop: AtomicBool,
    cancel: Option<&'a AtomicBool>,
    requests: AtomicU64,
    checkpoint: Mutex<File>,
    done: Mutex<Vec<BatchRecord>>,
    error: Mutex<Option<(usize, ProviderError)>>,
}

impl Shared<'_> {
    fn worker(&self) {
        loop {
            if self.stop.load(Ordering::SeqCst) || self.cancel.is_some_and(|c| c.load(Ordering::SeqCst)) {
                return;
            }
            let slot = self.next.fetch_add(1, Ordering::SeqCst);
            let Some(batch) = self.pending.get(slot) else {
                return;
            };
            match self.run_batch(batch) {
                Ok(record) => {
                    if let Err(e) = self.persist(&record) {
                        self.fail(batch.batch_index, ProviderError::Failed(format!("checkpoint write: {e}")));
                        return;
                    }
                    self.done.lock().unwrap().push(record);
                }
                Err(e) => {
                    self.fail(batch.batch_index, e);
                    return;
                }
            }
        }
    }

    fn fail(&self, batch: usize, e: ProviderError) {
        self.stop.store(true, Ordering::SeqCst);
        let mut slot = self.error.lock().unwrap();
        if slot.as_ref().is_none_or(|(b, _)| batch < *b) {
            *slot = Some((batch, e));
        }
    }

    fn run_batch(&self, batch: &BatchRecord) -> Result<BatchRecord, ProviderError> {
        let mut extra_requests = 0u64;
        let mut extra_chars = 0u64;
        let system = &self.job.system_instruction;
        let outcome = translate_with_bisection(
            system,
            &batch.inputs,
            self.opts.sentence_attempts,
            &mut |system: &str, lines: &[String]| {
                let reply = self.provider.translate(system, lines)?;
                let retries = u64::from(reply.requests.saturating_sub(1));
                self.requests.fetch_add(u64::from(reply.requests), Ordering::SeqCst);
                extra_requests += retries;
                extra_chars += retries * char_total(system, lines);
                Ok(reply.lines)
            },
        )?;
        let mut record = outcome.into_record(batch.batch_index, batch.inputs.clone());
        record.attempts += u32::try_from(extra_requests).unwrap_or(u32::MAX);
        record.sent_chars += extra_chars;
        Ok(record)
    }

    fn persist(&self, record: &BatchRecord) -> std::io::Result<()> {
        let mut line = serde_json::to_string(record).expect("record serialises");
        line.push('\n');
        let mut file = self.checkpoint.lock().unwrap();
        file.write_all(line.as_bytes())?;
        file.sync_data()
    }
}

fn char_total(system: &str, lines: &[String]) -> u64 {
    (system.chars().count() + lines.iter().map(|l| l.chars().count()).sum::<usize>()) as u64
}

/// Runs (or resumes) a job. Batches already in the checkpoint are never
/// sent again. `cancel` stops new batches from starting; batches in flight
/// finish and are checkpointed.
pub fn run_job(
    job: &BtJob,
    provider: &dyn Provider,
    opts: &RunOptions,
    cancel: Option<&AtomicBool>,
) -> Result<RunSummary, RunError> {
    let plan = plan_batches(job)?;
    let checkpoint_path = Path::new(&job.checkpoint_path);
    let existing = load_checkpoint(checkpoint_path)?;
    for (index, record) in &existing {
        match plan.get(*index) {
            Some(planned) if planned.inputs == record.inputs => {}
            _ => return Err(RunError::CheckpointMismatch { batch: *index }),
        }
    }
    let resumed_batches = existing.len();
    let pending: Vec<BatchRecord> = plan
        .into_iter()
        .filter(|b| !existing.contains_key(&b.batch_index))
        .collect();

    if let Some(dir) = checkpoint_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let file = OpenOptions::new().create(true).append(true).open(checkpoint_path)?;
    let shared = Shared {
        job,
        provider,
        opts,
        pending,
        next: AtomicUsize::new(0),
        stop: AtomicBool::new(false),
        cancel,
        requests: AtomicU64::new(0),
        checkpoint: Mutex::new(file),
        done: Mutex::new(Vec::new()),
        error: Mutex::new(None),
    };
    let workers = opts.concurrency.clamp(1, shared.pending.len().max(1));
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| shared.worker());
        }
    });

    let mut records = existing;
    for r in shared.done.into_inner().unwrap() {
        records.insert(r.batch_index, r);
    }
    if let Some((batch, source)) = shared.error.into_inner().unwrap() {
        return Err(RunError::Provider {
            batch,
            source,
            completed: records.len(),
        });
    }
    if records.len() < shared.pending.len() + resumed_batches {
        return Err(RunError::Cancelled { completed: records.len() });
    }

    let records: Vec<BatchRecord> = records.into_values().collect();
    let (corpus, failed_sentences) = assemble(job, &records);
    Ok(RunSummary {
        corpus,
        failed_sentences,
        cost: cost_report(&records),
        records,
        requests_this_run: shared.requests.into_inner(),
        resumed_batches,
    })
}

/// Builds the synthetic corpus from finished records, in input order.
/// Pair ids are `synthetic:<sentence index>`, so they stay stable when
/// some sentences fail.
pub fn assemble(job: &BtJob, records: &[BatchRecord]) -> (Corpus, Vec<usize>) {
    let mut pairs = Vec::new();
    let mut failed = Vec::new();
    let mut offset = 0;
    for record in records {
        let outputs = record.outputs.as_deref().unwrap_or(&[]);
        for (i, input) in record.inputs.iter().enumerate() {
            let index = offset + i;
            let translated = (!record.failed.contains(&i))
                .then(|| outputs.get(i))
                .flatten()
                .and_then(|out| {
                    SentencePair::new(
                        format!("synthetic:{index}"),
                        input,
                        out,
                        job.source_lang.clone(),
                        job.target_lang.clone(),
                        Origin::Synthetic,
                    )
                    .ok()
                });
            match translated {
                Some(pair) => pairs.push(pair),
                None => failed.push(index),
            }
        }
        offset += record.inputs.len();
    }
    let corpus = Corpus::new("synthetic", pairs).expect("indices are unique");
    (corpus, failed)
}
