use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use lrmt_core::pipeline::{
    dedup, default_stopwords, detect_swapped_rows, filter_length, flip_concat, split, swap_rows,
    verify_overlap, DedupKey, Side, SplitSpec, Stopwords, TRAIN_SPLIT,
};
use lrmt_core::{Corpus, LanguageTag, Origin};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{load, pretty_json, rebase_opt, rebase_path, to_json, Context, Outcome, Stage};
use crate::error::Failure;
use crate::io::{ingest, read_lines, Format, IngestOptions};

fn parse_enum<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_dedup_key(s: &str) -> Result<DedupKey, String> {
    parse_enum(s)
}

fn parse_side(s: &str) -> Result<Side, String> {
    parse_enum(s)
}

fn default_key() -> DedupKey {
    DedupKey::Source
}

fn default_side() -> Side {
    Side::Source
}

fn default_min() -> usize {
    5
}

fn default_max() -> usize {
    20
}

/// Reads one or more corpus files and concatenates them.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestArgs {
    /// Input file; repeat to concatenate several.
    #[arg(long = "in", required = true)]
    #[serde(rename = "in")]
    pub inputs: Vec<PathBuf>,
    /// Origin label, one per input or one for all. Required for TSV.
    #[arg(long = "origin")]
    #[serde(default, rename = "origin")]
    pub origins: Vec<String>,
    /// Overrides the format implied by each file extension.
    #[arg(long, value_enum)]
    #[serde(default)]
    pub format: Option<Format>,
    #[arg(long, default_value = "eng_Latn")]
    #[serde(default = "super::default_src_lang")]
    pub src_lang: String,
    #[arg(long, default_value = "trp_Latn")]
    #[serde(default = "super::default_tgt_lang")]
    pub tgt_lang: String,
    /// Skip the first row of TSV inputs.
    #[arg(long)]
    #[serde(default)]
    pub header: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    #[serde(default, skip_serializing)]
    pub json: bool,
}

impl Stage for IngestArgs {
    fn rebase(&mut self, base: &Path) {
        self.inputs.iter_mut().for_each(|p| rebase_path(p, base));
        rebase_path(&mut self.out, base);
    }

    fn inputs(&self) -> Vec<PathBuf> {
        self.inputs.clone()
    }

    fn declared_outputs(&self) -> Vec<PathBuf> {
        vec![self.out.clone()]
    }

    fn run(&self, _ctx: &Context) -> Result<Outcome, Failure> {
        let n = self.inputs.len();
        if !(self.origins.len() <= 1 || self.origins.len() == n) {
            return Err(Failure::usage(format!(
                "{} --origin values for {n} inputs; give one per input or one for all",
                self.origins.len()
            )));
        }
        let lang = |tag: &str| LanguageTag::new(tag).map_err(|e| Failure::usage(e.to_string()));
        let (source_lang, target_lang) = (lang(&self.src_lang)?, lang(&self.tgt_lang)?);

        let mut parts = Vec::new();
        let mut reports = Vec::new();
        for (i, path) in self.inputs.iter().enumerate() {
            let format = self.format.unwrap_or_else(|| Format::from_path(path));
            let label = self.origins.get(i).or(self.origins.first());
            let origin = match (label, format) {
                (Some(l), _) => l.parse::<Origin>().map_err(|e| Failure::usage(e.to_string()))?,
                (None, Format::Tsv) => {
                    return Err(Failure::usage(format!("--origin is required for TSV input {}", path.display())))
                }
                (None, Format::Jsonl) => Origin::Other("external".into()),
            };
            let opts = IngestOptions {
                format,
                source_lang: source_lang.clone(),
                target_lang: target_lang.clone(),
                origin,
                header: self.header,
            };
            let (corpus, report) = ingest(path, &opts)?;
            parts.push(corpus);
            reports.push(report);
        }
        let name = self.out.file_stem().and_then(|s| s.to_str()).unwrap_or("corpus");
        let corpus = Corpus::concat(name, &parts)?;

        let rows: usize = reports.iter().map(|r| r.rows).sum();
        let malformed: usize = reports.iter().map(|r| r.malformed.len()).sum();
        let mut out = Outcome::default()
            .count("rows", rows)
            .count("malformed", malformed)
            .count("pairs", corpus.len());
        out.write_corpus(&corpus, &self.out)?;
        let mut text = format!("ingested {} pairs from {rows} rows", corpus.len());
        for r in &reports {
            for m in &r.malformed {
                let _ = write!(text, "\n  {}:{}: {}", r.path, m.line, m.reason);
            }
        }
        if malformed > 0 {
            let _ = write!(text, "\n{malformed} malformed rows skipped");
        }
        out.text = text;
        out.report = json!({ "inputs": reports, "output": out.corpora[0] });
        Ok(out)
    }
}

/// Removes exact duplicates, keeping the first occurrence.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DedupArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// source, target or both.
    #[arg(long, value_parser = parse_dedup_key, default_value = "source")]
    #[serde(default = "default_key")]
    pub key: DedupKey,
    #[arg(long)]
    #[serde(default, skip_serializing)]
    pub json: bool,
}

impl Stage for DedupArgs {
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
        let (kept, removed) = dedup(&corpus, self.key);
        let mut out = Outcome::default().count("kept", kept.len()).count("removed", removed);
        out.write_corpus(&kept, &self.out)?;
        out.text = format!("kept {} of {} pairs ({removed} duplicates removed)", kept.len(), corpus.len());
        out.report = json!({ "input": corpus.len(), "kept": kept.len(), "removed": removed, "output": out.corpora[0] });
        Ok(out)
    }
}

/// Keeps pairs whose chosen side has between `min` and `max` words.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterLengthArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 5)]
    #[serde(default = "default_min")]
    pub min: usize,
    #[arg(long, default_value_t = 20)]
    #[serde(default = "default_max")]
    pub max: usize,
    /// source or target.
    #[arg(long, value_parser = parse_side, default_value = "source")]
    #[serde(default = "default_side")]
    pub side: Side,
    #[arg(long)]
    #[serde(default, skip_serializing)]
    pub json: bool,
}

impl Stage for FilterLengthArgs {
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
        let kept = filter_length(&corpus, self.min, self.max, self.side)
            .map_err(|e| Failure::usage(e.to_string()))?;
        let dropped = corpus.len() - kept.len();
        let mut out = Outcome::default().count("kept", kept.len()).count("dropped", dropped);
        out.write_corpus(&kept, &self.out)?;
        out.text = format!("kept {} of {} pairs with {}..={} words", kept.len(), corpus.len(), self.min, self.max);
        out.report = json!({ "input": corpus.len(), "kept": kept.len(), "dropped": dropped, "output": out.corpora[0] });
        Ok(out)
    }
}

/// Finds and repairs rows whose source and target columns are exchanged.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixSwapArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    /// Repaired corpus. Without it only detection runs.
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Flag rows with the stopword heuristic.
    #[arg(long, conflicts_with = "ids", required_unless_present = "ids")]
    #[serde(default)]
    pub detect: bool,
    /// File of ids to swap, one per line.
    #[arg(long)]
    #[serde(default)]
    pub ids: Option<PathBuf>,
    /// Stopword list replacing the built-in English one.
    #[arg(long)]
    #[serde(default)]
    pub stopwords: Option<PathBuf>,
    /// Where to write the ids that were swapped.
    #[arg(long)]
    #[serde(default)]
    pub ids_out: Option<PathBuf>,
    #[arg(long)]
    #[serde(default, skip_serializing)]
    pub json: bool,
}

impl Stage for FixSwapArgs {
    fn rebase(&mut self, base: &Path) {
        rebase_path(&mut self.input, base);
        rebase_opt(&mut self.out, base);
        rebase_opt(&mut self.ids, base);
        rebase_opt(&mut self.stopwords, base);
        rebase_opt(&mut self.ids_out, base);
    }

    fn inputs(&self) -> Vec<PathBuf> {
        [Some(&self.input), self.ids.as_ref(), self.stopwords.as_ref()]
            .into_iter()
            .flatten()
            .cloned()
            .collect()
    }

    fn declared_outputs(&self) -> Vec<PathBuf> {
        self.out.iter().chain(&self.ids_out).cloned().collect()
    }

    fn run(&self, _ctx: &Context) -> Result<Outcome, Failure> {
        let corpus = load(&self.input)?;
        let ids: Vec<String> = match (&self.ids, self.detect) {
            (Some(path), false) => read_lines(path)?
                .into_iter()
                .map(|l| l.trim().to_string())
                .filter(|l| !l.is_empty())
                .collect(),
            (None, true) => {
                let stopwords = match &self.stopwords {
                    Some(p) => Stopwords::parse(&fs::read_to_string(p)?),
                    None => default_stopwords(),
                };
                detect_swapped_rows(&corpus, &stopwords)
            }
            _ => return Err(Failure::usage("give exactly one of --detect or --ids FILE")),
        };
        let mut out = Outcome::default().count("swapped", ids.len());
        if let Some(path) = &self.out {
            let fixed = swap_rows(&corpus, &ids)?;
            out.write_corpus(&fixed, path)?;
        }
        if let Some(path) = &self.ids_out {
            let mut listing = ids.join("\n");
            if !ids.is_empty() {
                listing.push('\n');
            }
            out.write_file(path, listing.as_bytes())?;
        }
        out.text = match &self.out {
            Some(p) => format!("swapped {} rows -> {}", ids.len(), p.display()),
            None => format!("{} rows flagged as swapped:\n{}", ids.len(), ids.join("\n")),
        };
        out.report = json!({ "input": corpus.len(), "ids": ids, "swapped": self.out.is_some() });
        Ok(out)
    }
}

/// Carves held-out splits from a pool; the rest becomes `train`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    /// JSON split specification.
    #[arg(long)]
    pub spec: PathBuf,
    /// Receives `<split>.jsonl` for every split plus `train.jsonl`.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    #[serde(default, skip_serializing)]
    pub json: bool,
}

impl SplitArgs {
    fn read_spec(&self) -> Result<SplitSpec, Failure> {
        let text = fs::read_to_string(&self.spec)
            .map_err(|e| Failure::external(format!("cannot read {}: {e}", self.spec.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::validation(format!("{}: invalid split spec: {e}", self.spec.display())))
    }
}

impl Stage for SplitArgs {
    fn rebase(&mut self, base: &Path) {
        rebase_path(&mut self.input, base);
        rebase_path(&mut self.spec, base);
        rebase_path(&mut self.out_dir, base);
    }

    fn inputs(&self) -> Vec<PathBuf> {
        vec![self.input.clone(), self.spec.clone()]
    }

    fn declared_outputs(&self) -> Vec<PathBuf> {
        let mut names: Vec<String> = self
            .read_spec()
            .map(|s| s.splits.into_iter().map(|e| e.name).collect())
            .unwrap_or_default();
        names.push(TRAIN_SPLIT.into());
        names.iter().map(|n| self.out_dir.join(format!("{n}.jsonl"))).collect()
    }

    fn run(&self, _ctx: &Context) -> Result<Outcome, Failure> {
        let spec = self.read_spec()?;
        let pool = load(&self.input)?;
        let parts = split(&pool, &spec).map_err(|e| Failure::validation(e.to_string()))?;
        let mut out = Outcome::default();
        let mut text = String::new();
        for (name, corpus) in &parts {
            let path = self.out_dir.join(format!("{name}.jsonl"));
            out.write_corpus(&corpus.clone().with_name(name.as_str()), &path)?;
            out.counts.insert(name.clone(), corpus.len() as u64);
            let _ = writeln!(text, "{name}: {} pairs", corpus.len());
        }
        out.text = text.trim_end().to_string();
        out.report = json!({ "seed": spec.seed, "pool": pool.len(), "splits": out.corpora });
        Ok(out)
    }
}

/// Checks that no evaluation source sentence also appears in training.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyOverlapArgs {
    #[arg(long)]
    pub train: PathBuf,
    /// Evaluation corpus; repeatable. Named after its file stem.
    #[arg(long = "eval", required = true)]
    #[serde(rename = "eval")]
    pub evals: Vec<PathBuf>,
    /// Write the JSON report here as well.
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(default, skip_serializing)]
    pub json: bool,
}

impl Stage for VerifyOverlapArgs {
    fn rebase(&mut self, base: &Path) {
        rebase_path(&mut self.train, base);
        self.evals.iter_mut().for_each(|p| rebase_path(p, base));
        rebase_opt(&mut self.out, base);
    }

    fn inputs(&self) -> Vec<PathBuf> {
        let mut v = vec![self.train.clone()];
        v.extend(self.evals.iter().cloned());
        v
    }

    fn declared_outputs(&self) -> Vec<PathBuf> {
        self.out.iter().cloned().collect()
    }

    fn run(&self, _ctx: &Context) -> Result<Outcome, Failure> {
        let train = load(&self.train)?;
        let evals = self.evals.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
        let mut names = BTreeSet::new();
        for e in &evals {
            if !names.insert(e.name()) {
                return Err(Failure::usage(format!("two evaluation sets are named {:?}", e.name())));
            }
        }
        let refs: Vec<&Corpus> = evals.iter().collect();
        let report = verify_overlap(&train, &refs);
        let mut out = Outcome::default()
            .count("checked", report.checked_pairs)
            .count("collisions", report.collisions.len());
        if let Some(path) = &self.out {
            out.write_file(path, pretty_json(&report).as_bytes())?;
        }
        let mut text = format!(
            "checked {} evaluation pairs against {} training pairs: {}",
            report.checked_pairs,
            train.len(),
            if report.passed() { "no overlap" } else { "OVERLAP FOUND" }
        );
        for c in &report.collisions {
            let _ = write!(
                text,
                "\n  {} == {}:{}  {:?}",
                c.train_id, c.eval_set, c.eval_id, c.shared_source_text
            );
        }
        if !report.passed() {
            out.failure = Some(Failure::validation(format!(
                "{} train/eval collisions",
                report.collisions.len()
            )));
        }
        out.text = text;
        out.report = to_json(&report);
        Ok(out)
    }
}

/// Appends the direction-reversed copy of every pair.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlipArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    #[serde(default, skip_serializing)]
    pub json: bool,
}

impl Stage for FlipArgs {
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
        let flipped = flip_concat(&corpus);
        let mut out = Outcome::default().count("pairs", flipped.len());
        out.write_corpus(&flipped, &self.out)?;
        out.text = format!("{} pairs -> {} pairs", corpus.len(), flipped.len());
        out.report = json!({ "input": corpus.len(), "output": out.corpora[0] });
        Ok(out)
    }
}
