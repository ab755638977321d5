use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::tokenize::TokenizedSentence;

/// Longest block of tokens a single shift may move.
pub const MAX_SHIFT_SIZE: usize = 10;
/// Furthest a block may move, in token positions.
pub const MAX_SHIFT_DISTANCE: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum TerError {
    #[error("empty reference")]
    EmptyReference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerResult {
    /// Insertions, deletions, substitutions and shifts.
    pub edits: u64,
    pub shifts: u64,
    pub ref_len: u64,
}

impl TerResult {
    pub fn rate(&self) -> f64 {
        self.edits as f64 / self.ref_len as f64
    }
}

pub fn ter_signature() -> String {
    format!(
        "TER|nrefs:1|case:mixed|tok:13a-lite|shift-size:{MAX_SHIFT_SIZE}|shift-dist:{MAX_SHIFT_DISTANCE}|version:{}",
        env!("CARGO_PKG_VERSION")
    )
}

/// Word-level Levenshtein distance with unit costs.
pub fn edit_distance<S: PartialEq>(hyp: &[S], reference: &[S]) -> usize {
    let mut prev: Vec<usize> = (0..=reference.len()).collect();
    let mut cur = alloc::vec![0; reference.len() + 1];
    for (i, h) in hyp.iter().enumerate() {
        cur[0] = i + 1;
        for (j, r) in reference.iter().enumerate() {
            let sub = prev[j] + usize::from(h != r);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[reference.len()]
}

/// Edit distance if it is below `bound`, otherwise `None`. Stops as soon as
/// every cell of a DP row reaches `bound`.
fn edit_distance_below(hyp: &[u32], reference: &[u32], bound: usize, row: &mut Vec<usize>, cur: &mut Vec<usize>) -> Option<usize> {
    row.clear();
    row.extend(0..=reference.len());
    cur.clear();
    cur.resize(reference.len() + 1, 0);
    for (i, h) in hyp.iter().enumerate() {
        cur[0] = i + 1;
        let mut row_min = cur[0];
        for (j, r) in reference.iter().enumerate() {
            let sub = row[j] + usize::from(h != r);
            let v = sub.min(row[j + 1] + 1).min(cur[j] + 1);
            cur[j + 1] = v;
            row_min = row_min.min(v);
        }
        if row_min >= bound {
            return None;
        }
        core::mem::swap(row, cur);
    }
    let d = row[reference.len()];
    (d < bound).then_some(d)
}

/// Moves `seq[start..start + len]` so that it begins at `dest` in the result.
fn apply_shift(seq: &[u32], start: usize, len: usize, dest: usize, out: &mut Vec<u32>) {
    out.clear();
    let block = &seq[start..start + len];
    let rest = seq[..start].iter().chain(&seq[start + len..]);
    let mut placed = false;
    for (k, &w) in rest.enumerate() {
        if k == dest {
            out.extend_from_slice(block);
            placed = true;
        }
        out.push(w);
    }
    if !placed {
        out.extend_from_slice(block);
    }
}

fn occurs_in(block: &[u32], reference: &[u32]) -> bool {
    reference.windows(block.len()).any(|w| w == block)
}

fn intern<'a>(tokens: &'a [String], vocab: &mut BTreeMap<&'a str, u32>) -> Vec<u32> {
    tokens
        .iter()
        .map(|w| {
            let next = vocab.len() as u32;
            *vocab.entry(w.as_str()).or_insert(next)
        })
        .collect()
}

/// Translation edit rate of one hypothesis against one reference.
///
/// Shifts are found greedily: each round tries every block of up to
/// [`MAX_SHIFT_SIZE`] tokens that also occurs in the reference, at every
/// destination within [`MAX_SHIFT_DISTANCE`], and applies the one giving the
/// lowest word edit distance (earliest candidate on ties). Rounds stop when
/// no shift lowers the edit distance.
pub fn ter(hyp: &TokenizedSentence, reference: &TokenizedSentence) -> Result<TerResult, TerError> {
    if reference.is_empty() {
        return Err(TerError::EmptyReference);
    }
    // intern tokens so comparisons are integer compares
    let mut vocab: BTreeMap<&str, u32> = BTreeMap::new();
    let ref_ids = intern(reference.tokens(), &mut vocab);
    let mut current = intern(hyp.tokens(), &mut vocab);

    let (mut row, mut cur) = (Vec::new(), Vec::new());
    let mut distance = edit_distance(&current, &ref_ids);
    let mut shifts = 0u64;
    let mut candidate = Vec::with_capacity(current.len());
    let mut best_seq = Vec::with_capacity(current.len());

    while distance > 0 {
        let mut best = distance;
        let n = current.len();
        for start in 0..n {
            for len in 1..=MAX_SHIFT_SIZE.min(n - start) {
                if !occurs_in(&current[start..start + len], &ref_ids) {
                    break;
                }
                let lo = start.saturating_sub(MAX_SHIFT_DISTANCE);
                let hi = (start + MAX_SHIFT_DISTANCE).min(n - len);
                for dest in lo..=hi {
                    if dest == start {
                        continue;
                    }
                    apply_shift(&current, start, len, dest, &mut candidate);
                    if let Some(d) = edit_distance_below(&candidate, &ref_ids, best, &mut row, &mut cur) {
                        best = d;
                        core::mem::swap(&mut best_seq, &mut candidate);
                    }
                }
            }
        }
        if best < distance {
            core::mem::swap(&mut current, &mut best_seq);
            distance = best;
            shifts += 1;
        } else {
            break;
        }
    }

    Ok(TerResult {
        edits: distance as u64 + shifts,
        shifts,
        ref_len: reference.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws(s: &str) -> TokenizedSentence {
        TokenizedSentence::whitespace(s)
    }

    #[test]
    fn identity() {
        let r = ter(&ws("a b c"), &ws("a b c")).unwrap();
        assert_eq!(r.edits, 0);
        assert_eq!(r.rate(), 0.0);
    }

    #[test]
    fn empty_hypothesis_is_all_insertions() {
        let r = ter(&ws(""), &ws("a b c d")).unwrap();
        assert_eq!(r.edits, 4);
        assert_eq!(r.rate(), 1.0);
    }

    #[test]
    fn one_shift_beats_two_substitutions() {
        let r = ter(&ws("b a c d"), &ws("a b c d")).unwrap();
        assert_eq!(r.edits, 1);
        assert_eq!(r.shifts, 1);
        assert_eq!(r.rate(), 0.25);
    }

    #[test]
    fn block_shift() {
        // moving "c d" to the front: 1 edit instead of 4 substitutions
        let r = ter(&ws("a b c d"), &ws("c d a b")).unwrap();
        assert_eq!(r.edits, 1);
    }

    #[test]
    fn empty_reference_rejected() {
        assert_eq!(ter(&ws("a"), &ws("")), Err(TerError::EmptyReference));
    }

    #[test]
    fn levenshtein() {
        assert_eq!(edit_distance(&["a", "b", "c"], &["a", "c"]), 1);
        assert_eq!(edit_distance::<&str>(&[], &["a", "c"]), 2);
        assert_eq!(edit_distance(&["k", "i", "t"], &["s", "i", "t", "s"]), 2);
    }
}
