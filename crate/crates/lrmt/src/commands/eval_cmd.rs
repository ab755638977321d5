use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use lrmt_core::metrics::{evaluate_corpus, MeteorTables, MetricReport, ScoreColumns};
use lrmt_core::quality::cosine;
use serde::{Deserialize, Serialize};

use super::report::eval_table;
use super::{pretty_json, rebase_opt, rebase_path, to_json, Context, Outcome, Stage};
use crate::error::Failure;
use crate::http::RetryPolicy;
use crate::io::read_lines;
use crate::qa::{ModelClient, MAX_TEXTS_PER_REQUEST};

/// A metric report with the labels used for table rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledReport {
    #[serde(default)]
    pub system: Option<String>,
    #[serde(default)]
    pub direction: Option<String>,
    #[serde(flatten)]
    pub report: MetricReport,
}

/// Scores a hypothesis file against a reference file.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalRunArgs {
    /// System output, one sentence per line.
    #[arg(long)]
    pub hyp: PathBuf,
    /// Reference translations, aligned with `--hyp`.
    #[arg(long = "ref")]
    #[serde(rename = "ref")]
    pub reference: PathBuf,
    /// JSON file with optional `cosine` and `comet` per-sentence lists.
    #[arg(long, conflicts_with = "server")]
    #[serde(default)]
    pub scores: Option<PathBuf>,
    /// Model server used to compute the cosine (and, with `--src`, COMET)
    /// columns instead of reading them from `--scores`.
    #[arg(long)]
    #[serde(default)]
    pub server: Option<String>,
    /// Source sentences, needed for COMET.
    #[arg(long)]
    #[serde(default)]
    pub src: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a one-row results table in markdown.
    #[arg(long)]
    #[serde(default)]
    pub markdown: Option<PathBuf>,
    #[arg(long)]
    #[serde(default)]
    pub system: Option<String>,
    /// For example `en→trp`.
    #[arg(long)]
    #[serde(default)]
    pub direction: Option<String>,
    /// METEOR stem table (`word<TAB>stem` lines).
    #[arg(long)]
    #[serde(default)]
    pub stems: Option<PathBuf>,
    /// METEOR synonym table (`word<TAB>syn syn ...` lines).
    #[arg(long)]
    #[serde(default)]
    pub synonyms: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    #[serde(default = "super::default_retry_base_ms")]
    pub retry_base_ms: u64,
    #[arg(long)]
    #[serde(default, skip_serializing)]
    pub json: bool,
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::external(format!("cannot read {}: {e}", path.display())))
}

fn server_columns(
    client: &ModelClient,
    hyps: &[String],
    refs: &[String],
    srcs: Option<&[String]>,
) -> Result<ScoreColumns, Failure> {
    let mut cos = Vec::with_capacity(hyps.len());
    let step = MAX_TEXTS_PER_REQUEST / 2;
    for (h, r) in hyps.chunks(step).zip(refs.chunks(step)) {
        let mut texts = h.to_vec();
        texts.extend_from_slice(r);
        let vectors = client.embed_raw(&texts)?.vectors;
        let (hv, rv) = vectors.split_at(h.len());
        for (u, v) in hv.iter().zip(rv) {
            cos.push(cosine(u, v).map_err(|e| Failure::external(e.to_string()))?);
        }
    }
    let comet = match srcs {
        Some(srcs) => {
            let mut scores = Vec::with_capacity(hyps.len());
            for ((s, h), r) in srcs.chunks(step).zip(hyps.chunks(step)).zip(refs.chunks(step)) {
                scores.extend(client.comet(s, h, r)?.scores);
            }
            Some(scores)
        }
        None => None,
    };
    Ok(ScoreColumns {
        cosine: Some(cos),
        comet,
    })
}

impl Stage for EvalRunArgs {
    fn rebase(&mut self, base: &Path) {
        rebase_path(&mut self.hyp, base);
        rebase_path(&mut self.reference, base);
        rebase_opt(&mut self.scores, base);
        rebase_opt(&mut self.src, base);
        rebase_path(&mut self.out, base);
        rebase_opt(&mut self.markdown, base);
        rebase_opt(&mut self.stems, base);
        rebase_opt(&mut self.synonyms, base);
    }

    fn inputs(&self) -> Vec<PathBuf> {
        [&Some(self.hyp.clone()), &Some(self.reference.clone()), &self.scores, &self.src, &self.stems, &self.synonyms]
            .into_iter()
            .flatten()
            .cloned()
            .collect()
    }

    fn declared_outputs(&self) -> Vec<PathBuf> {
        std::iter::once(&self.out).chain(&self.markdown).cloned().collect()
    }

    fn run(&self, _ctx: &Context) -> Result<Outcome, Failure> {
        let hyps = read_lines(&self.hyp)?;
        let refs = read_lines(&self.reference)?;
        let columns = match (&self.scores, &self.server) {
            (Some(path), _) => serde_json::from_str(&read_text(path)?)
                .map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?,
            (None, Some(url)) => {
                if hyps.len() != refs.len() {
                    return Err(Failure::validation(format!("{} hypotheses but {} references", hyps.len(), refs.len())));
                }
                let srcs = self.src.as_deref().map(read_lines).transpose()?;
                if srcs.as_ref().is_some_and(|s| s.len() != hyps.len()) {
                    return Err(Failure::validation("--src is not aligned with --hyp"));
                }
                let client = ModelClient::new(url.clone(), RetryPolicy::with_base_ms(self.retry_base_ms));
                server_columns(&client, &hyps, &refs, srcs.as_deref())?
            }
            (None, None) => ScoreColumns::default(),
        };
        let tables = MeteorTables {
            stems: match &self.stems {
                Some(p) => MeteorTables::parse_stems(&read_text(p)?),
                None => Default::default(),
            },
            synonyms: match &self.synonyms {
                Some(p) => MeteorTables::parse_synonyms(&read_text(p)?),
                None => Default::default(),
            },
        };
        let report = evaluate_corpus(&hyps, &refs, &columns, &tables)
            .map_err(|e| Failure::validation(e.to_string()))?;
        let labeled = LabeledReport {
            system: self.system.clone(),
            direction: self.direction.clone(),
            report,
        };
        let table = eval_table(std::slice::from_ref(&labeled));
        let mut out = Outcome::default().count("sentences", labeled.report.sentences);
        out.write_file(&self.out, pretty_json(&labeled).as_bytes())?;
        if let Some(path) = &self.markdown {
            out.write_file(path, table.as_bytes())?;
        }
        out.text = format!("{table}{}", labeled.report.signature);
        out.report = to_json(&labeled);
        Ok(out)
    }
}
