use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collision {
    pub train_id: String,
    pub eval_set: String,
    pub eval_id: String,
    pub shared_source_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapReport {
    /// Number of evaluation pairs looked up against the training side.
    pub checked_pairs: usize,
    pub collisions: Vec<Collision>,
}

impl OverlapReport {
    pub fn passed(&self) -> bool {
        self.collisions.is_empty()
    }
}

/// Exact source-side overlap between `train` and each evaluation corpus.
/// Evaluation sets are not compared with each other.
pub fn verify_overlap(train: &Corpus, eval_sets: &[&Corpus]) -> OverlapReport {
    let mut index: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for p in train.pairs() {
        index.entry(p.source_text.as_str()).or_default().push(&p.id);
    }
    let mut checked_pairs = 0;
    let mut collisions = Vec::new();
    for eval in eval_sets {
        for p in eval.pairs() {
            checked_pairs += 1;
            if let Some(train_ids) = index.get(p.source_text.as_str()) {
                for train_id in train_ids {
                    collisions.push(Collision {
                        train_id: String::from(*train_id),
                        eval_set: eval.name().into(),
                        eval_id: p.id.clone(),
                        shared_source_text: p.source_text.clone(),
                    });
                }
            }
        }
    }
    OverlapReport {
        checked_pairs,
        collisions,
    }
}
