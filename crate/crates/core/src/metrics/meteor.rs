use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::tokenize::TokenizedSentence;

const ALPHA: f64 = 0.9;
const BETA: f64 = 3.0;
const GAMMA: f64 = 0.5;

/// Optional stem and synonym stages. Both empty means exact matching only.
#[derive(Debug, Clone, Default)]
pub struct MeteorTables {
    /// word → stem
    pub stems: BTreeMap<String, String>,
    /// word → synonyms
    pub synonyms: BTreeMap<String, BTreeSet<String>>,
}

impl MeteorTables {
    /// Parses `word<TAB>stem` lines.
    pub fn parse_stems(text: &str) -> BTreeMap<String, String> {
        text.lines()
            .filter_map(|l| l.split_once('\t'))
            .map(|(w, s)| (String::from(w.trim()), String::from(s.trim())))
            .collect()
    }

    /// Parses `word<TAB>syn1 syn2 ...` lines.
    pub fn parse_synonyms(text: &str) -> BTreeMap<String, BTreeSet<String>> {
        text.lines()
            .filter_map(|l| l.split_once('\t'))
            .map(|(w, syns)| {
                (
                    String::from(w.trim()),
                    syns.split_whitespace().map(String::from).collect(),
                )
            })
            .collect()
    }

    fn stem<'a>(&'a self, w: &'a str) -> &'a str {
        self.stems.get(w).map_or(w, String::as_str)
    }

    fn synonymous(&self, a: &str, b: &str) -> bool {
        self.synonyms.get(a).is_some_and(|s| s.contains(b))
            || self.synonyms.get(b).is_some_and(|s| s.contains(a))
    }

    fn stages(&self) -> &'static str {
        match (self.stems.is_empty(), self.synonyms.is_empty()) {
            (true, true) => "exact",
            (false, true) => "exact+stem",
            (true, false) => "exact+synonym",
            (false, false) => "exact+stem+synonym",
        }
    }
}

pub fn meteor_signature(tables: &MeteorTables) -> String {
    format!(
        "METEOR|nrefs:1|case:mixed|tok:13a-lite|alpha:{ALPHA}|beta:{BETA}|gamma:{GAMMA}|stages:{}|version:{}",
        tables.stages(),
        env!("CARGO_PKG_VERSION")
    )
}

/// Greedy staged alignment: `(hyp_index, ref_index)` sorted by hyp index.
fn align(hyp: &[String], reference: &[String], tables: &MeteorTables) -> Vec<(usize, usize)> {
    let mut hyp_used = vec![false; hyp.len()];
    let mut ref_used = vec![false; reference.len()];
    let mut pairs = Vec::new();
    let stages: [&dyn Fn(&str, &str) -> bool; 3] = [
        &|a, b| a == b,
        &|a, b| !tables.stems.is_empty() && tables.stem(a) == tables.stem(b),
        &|a, b| tables.synonymous(a, b),
    ];
    for matches in stages {
        for (i, h) in hyp.iter().enumerate() {
            if hyp_used[i] {
                continue;
            }
            if let Some(j) = (0..reference.len()).find(|&j| !ref_used[j] && matches(h, &reference[j])) {
                hyp_used[i] = true;
                ref_used[j] = true;
                pairs.push((i, j));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

fn count_chunks(alignment: &[(usize, usize)]) -> usize {
    let mut chunks = 0;
    let mut prev: Option<(usize, usize)> = None;
    for &(i, j) in alignment {
        match prev {
            Some((pi, pj)) if i == pi + 1 && j == pj + 1 => {}
            _ => chunks += 1,
        }
        prev = Some((i, j));
    }
    chunks
}

/// METEOR variant with exact / stem / synonym stages and the fragmentation
/// penalty `0.5 * (chunks / matches)^3`.
pub fn meteor_lite(
    hyp: &TokenizedSentence,
    reference: &TokenizedSentence,
    tables: &MeteorTables,
) -> f64 {
    let alignment = align(hyp.tokens(), reference.tokens(), tables);
    let m = alignment.len();
    if m == 0 {
        return 0.0;
    }
    let p = m as f64 / hyp.len() as f64;
    let r = m as f64 / reference.len() as f64;
    // P R / (0.9 P + 0.1 R) with the weights scaled to exact integers.
    let f_mean = 10.0 * p * r / (r + 9.0 * p);
    let chunks = count_chunks(&alignment);
    let frag = chunks as f64 / m as f64;
    let penalty = GAMMA * frag * frag * frag;
    f_mean * (1.0 - penalty)
}
