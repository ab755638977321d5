//! Markdown summary tables: corpus statistics and automatic metrics.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use lrmt_core::Origin;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{rebase_opt, rebase_path, CorpusSummary, Context, LabeledReport, Outcome, Stage};
use crate::error::Failure;
use crate::recipe::Manifest;

/// One line of the corpus statistics table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatRow {
    pub source: String,
    pub sentences: usize,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CorpusStats {
    /// Training rows by origin.
    pub train: Vec<StatRow>,
    pub total_train: usize,
    pub held_out: Vec<StatRow>,
}

fn kind_of<'a>(labels: impl Iterator<Item = &'a String>) -> String {
    let mut professional = false;
    let mut synthetic = false;
    for label in labels {
        match label.parse::<Origin>() {
            Ok(o) if o.is_professional() => professional = true,
            Ok(Origin::Synthetic) => synthetic = true,
            _ => return "Mixed".into(),
        }
    }
    match (professional, synthetic) {
        (true, false) => "Professional".into(),
        (false, true) => "Synthetic".into(),
        _ => "Mixed".into(),
    }
}

/// Corpus statistics from a run manifest. The training corpus is the input
/// of the last `flip` stage, or else the `train` output of the last `split`
/// stage. Held-out rows are every other split output.
pub fn corpus_stats(manifest: &Manifest) -> CorpusStats {
    let produced: Vec<&CorpusSummary> = manifest.stages.iter().flat_map(|s| &s.corpora).collect();
    let flip_input = manifest
        .stages
        .iter()
        .rev()
        .find(|s| s.op == "flip")
        .and_then(|s| s.inputs.first())
        .and_then(|input| produced.iter().rev().find(|c| c.path == input.path));
    let splits: Vec<&CorpusSummary> = manifest
        .stages
        .iter()
        .filter(|s| s.op == "split")
        .flat_map(|s| &s.corpora)
        .collect();
    let train = flip_input
        .copied()
        .or_else(|| splits.iter().rev().find(|c| c.name == lrmt_core::pipeline::TRAIN_SPLIT).copied());

    let mut stats = CorpusStats::default();
    if let Some(train) = train {
        let mut origins: Vec<(Origin, &String, usize)> = train
            .composition
            .iter()
            .map(|(label, n)| (label.parse().unwrap_or(Origin::Other(label.clone())), label, *n))
            .collect();
        origins.sort();
        for (_, label, n) in origins {
            stats.train.push(StatRow {
                source: label.clone(),
                sentences: n,
                kind: kind_of(std::iter::once(label)),
            });
        }
        stats.total_train = train.size;
    }
    for c in splits.iter().filter(|c| c.name != lrmt_core::pipeline::TRAIN_SPLIT) {
        stats.held_out.push(StatRow {
            source: c.name.clone(),
            sentences: c.size,
            kind: kind_of(c.composition.keys()),
        });
    }
    stats
}

fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

pub fn corpus_table(stats: &CorpusStats) -> String {
    let mut out = String::from("| Source | Sentences | Type |\n|---|---:|---|\n");
    for r in &stats.train {
        let _ = writeln!(out, "| {} | {} | {} |", r.source, thousands(r.sentences), r.kind);
    }
    let _ = writeln!(out, "| **Total Train** | **{}** | |", thousands(stats.total_train));
    for r in &stats.held_out {
        let _ = writeln!(out, "| {} | {} | {} |", r.source, thousands(r.sentences), r.kind);
    }
    out
}

fn opt(x: Option<f64>, decimals: usize) -> String {
    x.map_or_else(|| "—".to_string(), |v| format!("{v:.decimals$}"))
}

/// Results table, one row per report.
pub fn eval_table(reports: &[LabeledReport]) -> String {
    let mut out = String::from(
        "| System | Direction | BLEU | chrF | ROUGE-L | METEOR | TER | Cos Sim | COMET |\n\
         |---|---|---:|---:|---:|---:|---:|---:|---:|\n",
    );
    for r in reports {
        let m = &r.report;
        let _ = writeln!(
            out,
            "| {} | {} | {:.2} | {:.2} | {:.4} | {:.4} | {:.2} | {} | {} |",
            r.system.as_deref().unwrap_or("—"),
            r.direction.as_deref().unwrap_or("—"),
            m.bleu,
            m.chrf,
            m.rouge_l,
            m.meteor,
            m.ter,
            opt(m.cos_sim, 4),
            opt(m.comet, 4),
        );
    }
    out
}

/// Renders the corpus statistics and results tables.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportArgs {
    /// Recipe run manifest.
    #[arg(long)]
    #[serde(default)]
    pub manifest: Option<PathBuf>,
    /// `eval run` report; repeatable, one results row each.
    #[arg(long = "eval")]
    #[serde(default, rename = "eval")]
    pub evals: Vec<PathBuf>,
    /// Markdown destination.
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(default, skip_serializing)]
    pub json: bool,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::external(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))
}

impl Stage for ReportArgs {
    fn rebase(&mut self, base: &Path) {
        rebase_opt(&mut self.manifest, base);
        self.evals.iter_mut().for_each(|p| rebase_path(p, base));
        rebase_opt(&mut self.out, base);
    }

    fn inputs(&self) -> Vec<PathBuf> {
        self.manifest.iter().chain(&self.evals).cloned().collect()
    }

    fn declared_outputs(&self) -> Vec<PathBuf> {
        self.out.iter().cloned().collect()
    }

    fn run(&self, _ctx: &Context) -> Result<Outcome, Failure> {
        if self.manifest.is_none() && self.evals.is_empty() {
            return Err(Failure::usage("nothing to report: give --manifest and/or --eval"));
        }
        let stats = match &self.manifest {
            Some(p) => Some(corpus_stats(&read_json::<Manifest>(p)?)),
            None => None,
        };
        let reports = self.evals.iter().map(|p| read_json::<LabeledReport>(p)).collect::<Result<Vec<_>, _>>()?;
        let mut markdown = String::new();
        if let Some(stats) = &stats {
            markdown.push_str("## Corpus statistics\n\n");
            markdown.push_str(&corpus_table(stats));
        }
        if !reports.is_empty() {
            if !markdown.is_empty() {
                markdown.push('\n');
            }
            markdown.push_str("## Automatic evaluation\n\n");
            markdown.push_str(&eval_table(&reports));
        }
        let mut out = Outcome::default().count("result_rows", reports.len());
        if let Some(path) = &self.out {
            out.write_file(path, markdown.as_bytes())?;
        }
        out.text = markdown.trim_end().to_string();
        out.report = json!({ "corpus": stats, "results": reports });
        Ok(out)
    }
}
