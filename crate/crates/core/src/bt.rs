//! Back-translation batch planning, response validation and bisection retry.
//!
//! The provider call is abstracted as a closure so the same logic runs
//! against HTTP endpoints, in-process mocks and tests. Checkpointing and
//! concurrency live in the `lrmt` crate.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::lang::LanguageTag;

/// Default number of sentences per request.
pub const DEFAULT_BATCH_SIZE: usize = 50;
/// Attempts allowed for a single sentence before it is given up on.
pub const MAX_ATTEMPTS: u32 = 3;

/// Instruction sent with every request unless overridden.
pub const DEFAULT_INSTRUCTION: &str = "You are a professional English to Kokborok translator. \
Translate each line accurately. Maintain the line order. Output ONLY the translations.";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BtJobError {
    #[error("batch size must be at least 1")]
    ZeroBatch,
    #[error("sentence {0} is empty")]
    EmptySentence(usize),
    #[error("sentence {0} contains a newline")]
    Newline(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtJob {
    pub source_sentences: Vec<String>,
    pub system_instruction: String,
    pub batch_size: usize,
    pub source_lang: LanguageTag,
    pub target_lang: LanguageTag,
    pub checkpoint_path: String,
}

impl BtJob {
    pub fn validate(&self) -> Result<(), BtJobError> {
        if self.batch_size == 0 {
            return Err(BtJobError::ZeroBatch);
        }
        for (i, s) in self.source_sentences.iter().enumerate() {
            if s.trim().is_empty() {
                return Err(BtJobError::EmptySentence(i));
            }
            if s.contains(['\n', '\r']) {
                return Err(BtJobError::Newline(i));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BatchStatus {
    Pending,
    Done,
    /// Finished, but at least one sentence could not be translated.
    Failed,
}

/// One batch and its outcome. `Done` implies one non-empty output per input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub batch_index: usize,
    pub status: BatchStatus,
    pub inputs: Vec<String>,
    /// Aligned with `inputs`; positions listed in `failed` hold `""`.
    pub outputs: Option<Vec<String>>,
    /// Provider requests spent on this batch, bisection included.
    pub attempts: u32,
    #[serde(default)]
    pub failed: Vec<usize>,
    #[serde(default)]
    pub sent_chars: u64,
    #[serde(default)]
    pub received_chars: u64,
}

impl BatchRecord {
    pub fn is_terminal(&self) -> bool {
        self.status != BatchStatus::Pending
    }

    /// Checks the status/outputs invariant.
    pub fn is_consistent(&self) -> bool {
        match (&self.status, &self.outputs) {
            (BatchStatus::Pending, _) => true,
            (_, None) => false,
            (status, Some(out)) => {
                out.len() == self.inputs.len()
                    && out.iter().enumerate().all(|(i, o)| {
                        let failed = self.failed.contains(&i);
                        failed == o.is_empty()
                    })
                    && (*status == BatchStatus::Failed) == !self.failed.is_empty()
            }
        }
    }
}

/// Consecutive batches of `batch_size` (the last may be shorter).
pub fn plan_batches(job: &BtJob) -> Result<Vec<BatchRecord>, BtJobError> {
    job.validate()?;
    Ok(job
        .source_sentences
        .chunks(job.batch_size)
        .enumerate()
        .map(|(batch_index, chunk)| BatchRecord {
            batch_index,
            status: BatchStatus::Pending,
            inputs: chunk.to_vec(),
            outputs: None,
            attempts: 0,
            failed: Vec::new(),
            sent_chars: 0,
            received_chars: 0,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub expected: usize,
    pub actual: usize,
    /// 0-based line index of the first empty line, when counts agree.
    pub interior_empty: Option<usize>,
}

/// Splits a raw response into one line per input.
///
/// Trailing blank lines are dropped. The response is accepted only when the
/// line count equals `expected` and no remaining line is empty.
pub fn validate_response(expected: usize, raw_response: &str) -> Result<Vec<String>, Mismatch> {
    let mut lines: Vec<&str> = raw_response
        .split('\n')
        .map(|l| l.trim_end_matches('\r'))
        .collect();
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    if lines.len() != expected {
        return Err(Mismatch {
            expected,
            actual: lines.len(),
            interior_empty: None,
        });
    }
    if let Some(i) = lines.iter().position(|l| l.trim().is_empty()) {
        return Err(Mismatch {
            expected,
            actual: lines.len(),
            interior_empty: Some(i),
        });
    }
    Ok(lines.into_iter().map(|l| String::from(l.trim())).collect())
}

/// Result of driving one batch to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    pub outputs: Vec<Option<String>>,
    pub requests: u32,
    pub sent_chars: u64,
    pub received_chars: u64,
}

impl BatchOutcome {
    pub fn into_record(self, batch_index: usize, inputs: Vec<String>) -> BatchRecord {
        let failed: Vec<usize> = self
            .outputs
            .iter()
            .enumerate()
            .filter(|(_, o)| o.is_none())
            .map(|(i, _)| i)
            .collect();
        BatchRecord {
            batch_index,
            status: if failed.is_empty() {
                BatchStatus::Done
            } else {
                BatchStatus::Failed
            },
            inputs,
            outputs: Some(self.outputs.into_iter().map(Option::unwrap_or_default).collect()),
            attempts: self.requests,
            failed,
            sent_chars: self.sent_chars,
            received_chars: self.received_chars,
        }
    }
}

fn char_len(s: &str) -> u64 {
    s.chars().count() as u64
}

/// Translates `inputs`, bisecting on any malformed response.
///
/// `call(system, lines)` performs one provider request and returns the
/// response lines; an `Err` is a hard failure and aborts the batch. A
/// single sentence is tried up to `max_attempts` times before it is marked
/// failed.
pub fn translate_with_bisection<E>(
    system: &str,
    inputs: &[String],
    max_attempts: u32,
    call: &mut dyn FnMut(&str, &[String]) -> Result<Vec<String>, E>,
) -> Result<BatchOutcome, E> {
    let mut outcome = BatchOutcome {
        outputs: vec![None; inputs.len()],
        requests: 0,
        sent_chars: 0,
        received_chars: 0,
    };
    // explicit stack of [lo, hi) ranges, processed left to right
    let mut stack = vec![(0usize, inputs.len())];
    while let Some((lo, hi)) = stack.pop() {
        if lo == hi {
            continue;
        }
        let chunk = &inputs[lo..hi];
        let tries = if chunk.len() == 1 { max_attempts.max(1) } else { 1 };
        let mut accepted = None;
        for _ in 0..tries {
            outcome.requests += 1;
            outcome.sent_chars += char_len(system) + chunk.iter().map(|s| char_len(s)).sum::<u64>();
            let response = call(system, chunk)?;
            outcome.received_chars += response.iter().map(|s| char_len(s)).sum::<u64>();
            if let Ok(lines) = validate_response(chunk.len(), &response.join("\n")) {
                accepted = Some(lines);
                break;
            }
        }
        match accepted {
            Some(lines) => {
                for (slot, line) in outcome.outputs[lo..hi].iter_mut().zip(lines) {
                    *slot = Some(line);
                }
            }
            None if chunk.len() == 1 => {}
            None => {
                let mid = lo + chunk.len() / 2;
                stack.push((mid, hi));
                stack.push((lo, mid));
            }
        }
    }
    Ok(outcome)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CostReport {
    pub requests: u64,
    pub input_chars: u64,
    pub output_chars: u64,
}

/// Request and character totals over all attempts, retries included.
///
/// Input characters count the system instruction plus every line sent;
/// output characters count every line received. Line separators are not
/// counted.
pub fn cost_report(records: &[BatchRecord]) -> CostReport {
    records.iter().fold(CostReport::default(), |acc, r| CostReport {
        requests: acc.requests + u64::from(r.attempts),
        input_chars: acc.input_chars + r.sent_chars,
        output_chars: acc.output_chars + r.received_chars,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::ToString;

    fn job(n: usize, batch: usize) -> BtJob {
        BtJob {
            source_sentences: (0..n).map(|i| format!("sentence {i}")).collect(),
            system_instruction: DEFAULT_INSTRUCTION.into(),
            batch_size: batch,
            source_lang: LanguageTag::english(),
            target_lang: LanguageTag::kokborok(),
            checkpoint_path: "ckpt.jsonl".into(),
        }
    }

    fn lens(records: &[BatchRecord]) -> Vec<usize> {
        records.iter().map(|r| r.inputs.len()).collect()
    }

    #[test]
    fn batches() {
        assert_eq!(plan_batches(&job(25_000, 50)).unwrap().len(), 500);
        assert_eq!(lens(&plan_batches(&job(7, 3)).unwrap()), [3, 3, 1]);
        assert_eq!(lens(&plan_batches(&job(1, 50)).unwrap()), [1]);
        let idx: Vec<usize> = plan_batches(&job(7, 3)).unwrap().iter().map(|r| r.batch_index).collect();
        assert_eq!(idx, [0, 1, 2]);
        assert_eq!(plan_batches(&job(3, 0)), Err(BtJobError::ZeroBatch));
        let mut j = job(2, 1);
        j.source_sentences[1] = "a\nb".into();
        assert_eq!(plan_batches(&j), Err(BtJobError::Newline(1)));
    }

    #[test]
    fn response_validation() {
        assert_eq!(validate_response(3, "a\nb\nc").unwrap(), ["a", "b", "c"]);
        assert_eq!(validate_response(3, "a\nb\nc\n\n").unwrap().len(), 3);
        assert_eq!(
            validate_response(3, "a\nb"),
            Err(Mismatch { expected: 3, actual: 2, interior_empty: None })
        );
        assert_eq!(
            validate_response(3, "a\n\nc"),
            Err(Mismatch { expected: 3, actual: 3, interior_empty: Some(1) })
        );
    }

    fn echo(_: &str, lines: &[String]) -> Result<Vec<String>, ()> {
        Ok(lines.iter().map(|l| format!("TRP({l})")).collect())
    }

    #[test]
    fn clean_batch_is_one_request() {
        let inputs: Vec<String> = (0..5).map(|i| i.to_string()).collect();
        let out = translate_with_bisection("sys", &inputs, 3, &mut echo).unwrap();
        assert_eq!(out.requests, 1);
        assert_eq!(out.outputs[4].as_deref(), Some("TRP(4)"));
    }

    #[test]
    fn merged_lines_trigger_bisection() {
        let inputs: Vec<String> = (0..4).map(|i| i.to_string()).collect();
        let mut first = true;
        let mut merging = |_: &str, lines: &[String]| -> Result<Vec<String>, ()> {
            let mut out: Vec<String> = lines.iter().map(|l| format!("TRP({l})")).collect();
            if first && out.len() > 1 {
                first = false;
                let b = out.remove(1);
                out[0].push(' ');
                out[0].push_str(&b);
            }
            Ok(out)
        };
        let out = translate_with_bisection("sys", &inputs, 3, &mut merging).unwrap();
        // whole batch, then two halves
        assert_eq!(out.requests, 3);
        let got: Vec<_> = out.outputs.iter().map(|o| o.clone().unwrap()).collect();
        assert_eq!(got, ["TRP(0)", "TRP(1)", "TRP(2)", "TRP(3)"]);
    }

    #[test]
    fn stubborn_sentence_fails_alone() {
        let inputs: Vec<String> = ["ok", "bad", "ok2"].iter().map(|s| s.to_string()).collect();
        let mut call = |_: &str, lines: &[String]| -> Result<Vec<String>, ()> {
            Ok(lines
                .iter()
                .map(|l| if l == "bad" { String::new() } else { format!("T {l}") })
                .collect())
        };
        let out = translate_with_bisection("", &inputs, 3, &mut call).unwrap();
        assert_eq!(out.outputs, [Some("T ok".into()), None, Some("T ok2".into())]);
        // [0,3) fails; [0,1) ok; [1,3) fails; [1,2) x3; [2,3) ok
        assert_eq!(out.requests, 1 + 1 + 1 + 3 + 1);
        let rec = out.into_record(0, inputs);
        assert_eq!(rec.status, BatchStatus::Failed);
        assert_eq!(rec.failed, [1]);
        assert!(rec.is_consistent());
    }

    #[test]
    fn hard_failure_propagates() {
        let inputs = vec!["a".to_string()];
        let mut call = |_: &str, _: &[String]| -> Result<Vec<String>, &'static str> { Err("down") };
        assert_eq!(translate_with_bisection("", &inputs, 3, &mut call), Err("down"));
    }

    #[test]
    fn cost_by_hand() {
        let rec = |attempts, sent, received| BatchRecord {
            batch_index: 0,
            status: BatchStatus::Done,
            inputs: vec![],
            outputs: Some(vec![]),
            attempts,
            failed: vec![],
            sent_chars: sent,
            received_chars: received,
        };
        assert_eq!(cost_report(&[]), CostReport::default());
        // system "sys" (3) + "ab" + "cde" = 8 sent; "x" + "yz" = 3 received
        let inputs: Vec<String> = vec!["ab".into(), "cde".into()];
        let mut call = |_: &str, _: &[String]| -> Result<Vec<String>, ()> { Ok(vec!["x".into(), "yz".into()]) };
        let a = translate_with_bisection("sys", &inputs, 3, &mut call).unwrap().into_record(0, inputs.clone());
        // second batch: "sys" (3) + "hello" (5) = 8 sent; "x" + "yz" rejected
        // (2 lines for 1 input) three times -> 3 requests, 24 sent, 9 received
        let single: Vec<String> = vec!["hello".into()];
        let b = translate_with_bisection("sys", &single, 3, &mut call).unwrap().into_record(1, single);
        let c = cost_report(&[a, b]);
        assert_eq!(c, CostReport { requests: 4, input_chars: 8 + 24, output_chars: 3 + 9 });
        assert_eq!(cost_report(&[rec(2, 10, 4)]).requests, 2);
    }
}
