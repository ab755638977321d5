//! Deterministic corpus → corpus transforms.

mod dedup;
mod filter;
mod flip;
mod overlap;
mod split;
mod swap;

use serde::{Deserialize, Serialize};

pub use dedup::dedup;
pub use filter::{filter_length, LengthFilterError};
pub use flip::{flip_concat, REVERSED_SUFFIX};
pub use overlap::{verify_overlap, Collision, OverlapReport};
pub use split::{split, SplitEntry, SplitError, SplitSpec, TRAIN_SPLIT};
pub use swap::{default_stopwords, detect_swapped_rows, stopword_ratio, swap_rows, Stopwords};

/// Which side(s) of a pair a transform looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Source,
    Target,
}

/// Dedup key selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DedupKey {
    Source,
    Target,
    Both,
}
