//! Subcommand implementations shared by the CLI and the recipe runner.
//!
//! Each argument struct derives both `clap::Args` and serde, so a recipe
//! stage's `params` object and the equivalent command line build the same
//! value and run the same code.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;

use lrmt_core::Corpus;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Failure;
use crate::io::{read_corpus, write_corpus, Format};

mod bt_cmd;
mod corpus_ops;
mod eval_cmd;
mod humaneval_cmd;
mod qa_cmd;
pub mod report;

pub use bt_cmd::BtRunArgs;
pub use corpus_ops::{
    DedupArgs, FilterLengthArgs, FixSwapArgs, FlipArgs, IngestArgs, SplitArgs, VerifyOverlapArgs,
};
pub use eval_cmd::{EvalRunArgs, LabeledReport};
pub use humaneval_cmd::HumanevalReportArgs;
pub use qa_cmd::{QaAnalyzeArgs, QaFilterArgs, QaSampleArgs, QaScoreArgs};
pub use report::ReportArgs;

/// Process-level settings that never come from flags.
#[derive(Debug, Default)]
pub struct Context<'a> {
    pub provider_key: Option<String>,
    pub model_server: Option<String>,
    pub cancel: Option<&'a AtomicBool>,
}

impl Context<'_> {
    pub fn from_env() -> Self {
        let var = |name: &str| std::env::var(name).ok().filter(|v| !v.is_empty());
        Context {
            provider_key: var(crate::bt::PROVIDER_KEY_VAR),
            model_server: var(crate::qa::MODEL_SERVER_VAR),
            cancel: None,
        }
    }
}

/// Size and per-origin make-up of a corpus file a command wrote.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub path: String,
    pub name: String,
    pub size: usize,
    pub composition: BTreeMap<String, usize>,
}

impl CorpusSummary {
    pub fn of(path: &Path, corpus: &Corpus) -> Self {
        CorpusSummary {
            path: path.display().to_string(),
            name: corpus.name().to_string(),
            size: corpus.len(),
            composition: corpus
                .composition()
                .iter()
                .map(|(o, n)| (o.label().to_string(), *n))
                .collect(),
        }
    }
}

/// What a command did.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub outputs: Vec<PathBuf>,
    pub corpora: Vec<CorpusSummary>,
    pub counts: BTreeMap<String, u64>,
    /// Printed with `--json`.
    pub report: Value,
    /// Printed otherwise.
    pub text: String,
    /// Set when the command ran to completion but its verdict is a failure
    /// (for example, overlap collisions).
    pub failure: Option<Failure>,
}

impl Outcome {
    pub fn count(mut self, key: &str, value: usize) -> Self {
        self.counts.insert(key.to_string(), value as u64);
        self
    }

    pub fn write_corpus(&mut self, corpus: &Corpus, path: &Path) -> Result<(), Failure> {
        write_corpus(corpus, path, Format::from_path(path))
            .map_err(|e| Failure::external(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(path.to_path_buf());
        self.corpora.push(CorpusSummary::of(path, corpus));
        Ok(())
    }

    pub fn write_file(&mut self, path: &Path, bytes: &[u8]) -> Result<(), Failure> {
        crate::io::write_atomic(path, bytes)
            .map_err(|e| Failure::external(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }
}

/// A command usable as a recipe stage.
pub trait Stage {
    /// Resolves relative paths against `base`.
    fn rebase(&mut self, base: &Path);
    /// Files the stage reads.
    fn inputs(&self) -> Vec<PathBuf>;
    /// Files the stage will write, as far as they are known in advance.
    fn declared_outputs(&self) -> Vec<PathBuf>;
    fn run(&self, ctx: &Context) -> Result<Outcome, Failure>;
}

pub(crate) fn rebase_path(path: &mut PathBuf, base: &Path) {
    if path.is_relative() {
        *path = base.join(&*path);
    }
}

pub(crate) fn rebase_opt(path: &mut Option<PathBuf>, base: &Path) {
    if let Some(p) = path {
        rebase_path(p, base);
    }
}

pub(crate) fn load(path: &Path) -> Result<Corpus, Failure> {
    Ok(read_corpus(path)?)
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("report types serialise")
}

pub(crate) fn pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialise");
    s.push('\n');
    s
}

pub(crate) fn default_src_lang() -> String {
    "eng_Latn".into()
}

pub(crate) fn default_tgt_lang() -> String {
    "trp_Latn".into()
}

pub(crate) fn default_retry_base_ms() -> u64 {
    1000
}
