//! Human-evaluation ratings, per-annotator means and pairwise Cohen's kappa.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RatingsError {
    #[error("rating vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("no ratings")]
    Empty,
    #[error("item {item}, annotator {annotator}: rating {value} outside 1..=5")]
    OutOfRange {
        item: String,
        annotator: String,
        value: u8,
    },
    #[error("item {item} rated twice by {annotator}")]
    Duplicate { item: String, annotator: String },
    #[error("item {item} has no rating from {annotator}")]
    Missing { item: String, annotator: String },
    #[error("need at least two annotators, found {0}")]
    TooFewAnnotators(usize),
}

/// Unweighted Cohen's kappa between two raters.
///
/// Computed from integer counts as
/// `(N·agree − Σ n_a(c)·n_b(c)) / (N² − Σ n_a(c)·n_b(c))`, which is exactly
/// symmetric in its arguments. When chance agreement is 1 (both raters use
/// one identical category throughout) the result is defined as 1.
pub fn cohen_kappa<T: Ord>(a: &[T], b: &[T]) -> Result<f64, RatingsError> {
    if a.len() != b.len() {
        return Err(RatingsError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(RatingsError::Empty);
    }
    let n = a.len() as i128;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as i128;
    let mut marginals: BTreeMap<&T, (i128, i128)> = BTreeMap::new();
    for x in a {
        marginals.entry(x).or_default().0 += 1;
    }
    for y in b {
        marginals.entry(y).or_default().1 += 1;
    }
    let chance: i128 = marginals.values().map(|(ca, cb)| ca * cb).sum();
    let denom = n * n - chance;
    if denom == 0 {
        return Ok(1.0);
    }
    Ok((n * agree - chance) as f64 / denom as f64)
}

/// One CSV row: `item_id, annotator, adequacy, fluency`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRow {
    pub item_id: String,
    pub annotator: String,
    pub adequacy: u8,
    pub fluency: u8,
}

/// Complete items × annotators matrices of 1–5 ratings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingsTable {
    items: Vec<String>,
    annotators: Vec<String>,
    /// `[item][annotator]`
    adequacy: Vec<Vec<u8>>,
    fluency: Vec<Vec<u8>>,
}

impl RatingsTable {
    /// Builds a table from long-format rows. Items and annotators keep their
    /// first-appearance order.
    pub fn from_rows(rows: &[RatingRow]) -> Result<Self, RatingsError> {
        let mut items: Vec<String> = Vec::new();
        let mut annotators: Vec<String> = Vec::new();
        let mut item_idx = BTreeMap::new();
        let mut ann_idx = BTreeMap::new();
        for r in rows {
            for (value, _) in [(r.adequacy, "adequacy"), (r.fluency, "fluency")] {
                if !(1..=5).contains(&value) {
                    return Err(RatingsError::OutOfRange {
                        item: r.item_id.clone(),
                        annotator: r.annotator.clone(),
                        value,
                    });
                }
            }
            item_idx.entry(r.item_id.clone()).or_insert_with(|| {
                items.push(r.item_id.clone());
                items.len() - 1
            });
            ann_idx.entry(r.annotator.clone()).or_insert_with(|| {
                annotators.push(r.annotator.clone());
                annotators.len() - 1
            });
        }
        if items.is_empty() {
            return Err(RatingsError::Empty);
        }
        if annotators.len() < 2 {
            return Err(RatingsError::TooFewAnnotators(annotators.len()));
        }
        let mut adequacy = vec![vec![0u8; annotators.len()]; items.len()];
        let mut fluency = vec![vec![0u8; annotators.len()]; items.len()];
        for r in rows {
            let (i, a) = (item_idx[&r.item_id], ann_idx[&r.annotator]);
            if adequacy[i][a] != 0 {
                return Err(RatingsError::Duplicate {
                    item: r.item_id.clone(),
                    annotator: r.annotator.clone(),
                });
            }
            adequacy[i][a] = r.adequacy;
            fluency[i][a] = r.fluency;
        }
        for (i, row) in adequacy.iter().enumerate() {
            if let Some(a) = row.iter().position(|&v| v == 0) {
                return Err(RatingsError::Missing {
                    item: items[i].clone(),
                    annotator: annotators[a].clone(),
                });
            }
        }
        Ok(RatingsTable {
            items,
            annotators,
            adequacy,
            fluency,
        })
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn annotators(&self) -> &[String] {
        &self.annotators
    }

    fn column(matrix: &[Vec<u8>], annotator: usize) -> Vec<u8> {
        matrix.iter().map(|row| row[annotator]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionPair {
    pub adequacy: f64,
    pub fluency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatorMean {
    pub annotator: String,
    pub adequacy: f64,
    pub fluency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairKappa {
    pub first: String,
    pub second: String,
    pub adequacy: f64,
    pub fluency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub items: usize,
    pub kappa_kind: String,
    pub means: Vec<AnnotatorMean>,
    /// Mean over every item × annotator cell.
    pub grand_mean: CriterionPair,
    pub kappa: Vec<PairKappa>,
}

fn mean_u8(xs: impl Iterator<Item = u8>) -> f64 {
    let (sum, n) = xs.fold((0u64, 0u64), |(s, n), x| (s + u64::from(x), n + 1));
    sum as f64 / n as f64
}

pub fn analyze(table: &RatingsTable) -> Result<AgreementReport, RatingsError> {
    let k = table.annotators.len();
    let means = (0..k)
        .map(|a| AnnotatorMean {
            annotator: table.annotators[a].clone(),
            adequacy: mean_u8(table.adequacy.iter().map(|r| r[a])),
            fluency: mean_u8(table.fluency.iter().map(|r| r[a])),
        })
        .collect();
    let grand_mean = CriterionPair {
        adequacy: mean_u8(table.adequacy.iter().flatten().copied()),
        fluency: mean_u8(table.fluency.iter().flatten().copied()),
    };
    let mut kappa = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            kappa.push(PairKappa {
                first: table.annotators[a].clone(),
                second: table.annotators[b].clone(),
                adequacy: cohen_kappa(
                    &RatingsTable::column(&table.adequacy, a),
                    &RatingsTable::column(&table.adequacy, b),
                )?,
                fluency: cohen_kappa(
                    &RatingsTable::column(&table.fluency, a),
                    &RatingsTable::column(&table.fluency, b),
                )?,
            });
        }
    }
    Ok(AgreementReport {
        items: table.items.len(),
        kappa_kind: "unweighted".into(),
        means,
        grand_mean,
        kappa,
    })
}

/// Markdown table: annotator rows, the mean row, then one kappa row per
/// annotator pair. Means use 2 decimals, kappa 3.
pub fn render_table(report: &AgreementReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Human evaluation (1-5 scale, n={}); Cohen's kappa ({}) per annotator pair.\n",
        report.items, report.kappa_kind
    );
    out.push_str("| Annotator | Adequacy | Fluency |\n|---|---|---|\n");
    for m in &report.means {
        let _ = writeln!(out, "| {} | {:.2} | {:.2} |", m.annotator, m.adequacy, m.fluency);
    }
    let _ = writeln!(
        out,
        "| **Mean** | **{:.2}** | **{:.2}** |",
        report.grand_mean.adequacy, report.grand_mean.fluency
    );
    for k in &report.kappa {
        let _ = writeln!(
            out,
            "| κ ({} vs {}) | {:.3} | {:.3} |",
            k.first, k.second, k.adequacy, k.fluency
        );
    }
    out
}

/// Convenience for building rows in code.
pub fn rows_from_matrix(
    annotators: &[&str],
    adequacy: &[Vec<u8>],
    fluency: &[Vec<u8>],
) -> Vec<RatingRow> {
    let mut rows = Vec::new();
    for (i, (ad, fl)) in adequacy.iter().zip(fluency).enumerate() {
        for (a, name) in annotators.iter().enumerate() {
            rows.push(RatingRow {
                item_id: format!("{i}"),
                annotator: String::from(*name),
                adequacy: ad[a],
                fluency: fl[a],
            });
        }
    }
    rows
}
