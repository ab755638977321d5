use std::path::{Path, PathBuf};

use clap::Args;
use lrmt_core::humaneval::{analyze, render_table, RatingRow, RatingsTable};
use serde::{Deserialize, Serialize};

use super::{pretty_json, rebase_opt, rebase_path, to_json, Context, Outcome, Stage};
use crate::error::Failure;

/// Reads a headered `item_id,annotator,adequacy,fluency` CSV.
pub fn read_ratings(path: &Path) -> Result<Vec<RatingRow>, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::external(format!("cannot read {}: {e}", path.display())))?;
    reader
        .deserialize()
        .map(|row| row.map_err(|e| Failure::validation(format!("{}: {e}", path.display()))))
        .collect()
}

/// Per-annotator means and pairwise Cohen's kappa from a ratings CSV.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumanevalReportArgs {
    #[arg(long)]
    pub ratings: PathBuf,
    /// Markdown table destination.
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// JSON report destination.
    #[arg(long)]
    #[serde(default)]
    pub json: Option<PathBuf>,
}

impl Stage for HumanevalReportArgs {
    fn rebase(&mut self, base: &Path) {
        rebase_path(&mut self.ratings, base);
        rebase_opt(&mut self.out, base);
        rebase_opt(&mut self.json, base);
    }

    fn inputs(&self) -> Vec<PathBuf> {
        vec![self.ratings.clone()]
    }

    fn declared_outputs(&self) -> Vec<PathBuf> {
        self.out.iter().chain(&self.json).cloned().collect()
    }

    fn run(&self, _ctx: &Context) -> Result<Outcome, Failure> {
        let rows = read_ratings(&self.ratings)?;
        let table = RatingsTable::from_rows(&rows).map_err(|e| Failure::validation(e.to_string()))?;
        let report = analyze(&table).map_err(|e| Failure::validation(e.to_string()))?;
        let markdown = render_table(&report);
        let mut out = Outcome::default()
            .count("items", table.items().len())
            .count("annotators", table.annotators().len());
        if let Some(path) = &self.out {
            out.write_file(path, markdown.as_bytes())?;
        }
        if let Some(path) = &self.json {
            out.write_file(path, pretty_json(&report).as_bytes())?;
        }
        out.text = markdown.trim_end().to_string();
        out.report = to_json(&report);
        Ok(out)
    }
}
