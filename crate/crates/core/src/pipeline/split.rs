use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::hashkey::hash_order;
use crate::lang::Origin;

/// Name of the remainder split.
pub const TRAIN_SPLIT: &str = "train";

/// One held-out split request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitEntry {
    pub name: String,
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restrict_origin: Option<Origin>,
}

/// Held-out splits, carved in declaration order, plus the seed that drives
/// the hash-sort.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub seed: String,
    pub splits: Vec<SplitEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SplitError {
    #[error("split name {0:?} is used more than once")]
    DuplicateName(String),
    #[error("split name {0:?} is reserved for the remainder")]
    ReservedName(String),
    #[error("split {name:?} wants {requested} pairs but only {available} are available")]
    Insufficient {
        name: String,
        requested: usize,
        available: usize,
    },
}

/// Partitions `pool` into the requested splits plus a `train` remainder.
///
/// Candidates are ordered by `SHA-256(seed || 0x00 || source_text)` (pair id
/// breaks ties) and each split takes the first `count` still-unassigned
/// candidates matching its origin restriction. Members of every output keep
/// their pool order.
pub fn split(pool: &Corpus, spec: &SplitSpec) -> Result<Vec<(String, Corpus)>, SplitError> {
    let mut names = BTreeSet::new();
    for entry in &spec.splits {
        if entry.name == TRAIN_SPLIT {
            return Err(SplitError::ReservedName(entry.name.clone()));
        }
        if !names.insert(entry.name.as_str()) {
            return Err(SplitError::DuplicateName(entry.name.clone()));
        }
    }

    let pairs = pool.pairs();
    let order = hash_order(&spec.seed, pairs, |p| &p.source_text, |p| &p.id);
    // assignment[i] = index into spec.splits, or None for train
    let mut assignment: Vec<Option<usize>> = vec![None; pairs.len()];

    for (split_idx, entry) in spec.splits.iter().enumerate() {
        let mut taken = 0;
        for &i in &order {
            if taken == entry.count {
                break;
            }
            if assignment[i].is_some() {
                continue;
            }
            if let Some(origin) = &entry.restrict_origin {
                if &pairs[i].origin != origin {
                    continue;
                }
            }
            assignment[i] = Some(split_idx);
            taken += 1;
        }
        if taken < entry.count {
            return Err(SplitError::Insufficient {
                name: entry.name.clone(),
                requested: entry.count,
                available: taken,
            });
        }
    }

    let mut buckets: Vec<Vec<_>> = vec![Vec::new(); spec.splits.len() + 1];
    for (pair, slot) in pairs.iter().zip(&assignment) {
        let b = slot.unwrap_or(spec.splits.len());
        buckets[b].push(pair.clone());
    }
    let train = buckets.pop().unwrap_or_default();
    let mut out: Vec<(String, Corpus)> = spec
        .splits
        .iter()
        .zip(buckets)
        .map(|(e, b)| (e.name.clone(), Corpus::from_valid(e.name.clone(), b)))
        .collect();
    out.push((
        TRAIN_SPLIT.into(),
        Corpus::from_valid(TRAIN_SPLIT.into(), train),
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_util::pair;
    use crate::corpus::SentencePair;
    use alloc::format;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn pool(n: usize) -> Corpus {
        let pairs = (0..n)
            .map(|i| {
                let origin = if i % 2 == 0 { Origin::SmolDoc } else { Origin::Gatitos };
                pair(&format!("p:{i}"), &format!("sentence {i}"), &format!("t {i}"), origin)
            })
            .collect();
        Corpus::new("pool", pairs).unwrap()
    }

    fn spec(seed: &str, splits: &[(&str, usize, Option<Origin>)]) -> SplitSpec {
        SplitSpec {
            seed: seed.to_string(),
            splits: splits
                .iter()
                .map(|(n, c, o)| SplitEntry {
                    name: n.to_string(),
                    count: *c,
                    restrict_origin: o.clone(),
                })
                .collect(),
        }
    }

    fn ids(c: &Corpus) -> BTreeSet<String> {
        c.pairs().iter().map(|p| p.id.clone()).collect()
    }

    #[test]
    fn partition_of_ten() {
        let p = pool(10);
        let s = spec("99", &[("test", 3, None)]);
        let out = split(&p, &s).unwrap();
        assert_eq!(out[0].0, "test");
        assert_eq!(out[0].1.len(), 3);
        assert_eq!(out[1].0, "train");
        assert_eq!(out[1].1.len(), 7);
        assert!(ids(&out[0].1).is_disjoint(&ids(&out[1].1)));
        assert_eq!(split(&p, &s).unwrap(), out);
    }

    #[test]
    fn membership_follows_hash_order() {
        // Independent check: the 3 smallest SHA-256 keys are the members.
        use sha2::{Digest, Sha256};
        let p = pool(10);
        let mut keyed: Vec<(Vec<u8>, String)> = p
            .pairs()
            .iter()
            .map(|x| {
                let mut buf = b"seed-a".to_vec();
                buf.push(0);
                buf.extend_from_slice(x.source_text.as_bytes());
                (Sha256::digest(&buf).to_vec(), x.id.clone())
            })
            .collect();
        keyed.sort();
        let expected: BTreeSet<String> = keyed.into_iter().take(3).map(|(_, id)| id).collect();
        let out = split(&p, &spec("seed-a", &[("test", 3, None)])).unwrap();
        assert_eq!(ids(&out[0].1), expected);
    }

    #[test]
    fn origin_restriction() {
        let p = pool(10);
        let out = split(&p, &spec("x", &[("test", 4, Some(Origin::SmolDoc))])).unwrap();
        assert!(out[0].1.pairs().iter().all(|x| x.origin == Origin::SmolDoc));
        let err = split(&p, &spec("x", &[("test", 6, Some(Origin::SmolDoc))])).unwrap_err();
        assert_eq!(
            err,
            SplitError::Insufficient {
                name: "test".into(),
                requested: 6,
                available: 5
            }
        );
    }

    #[test]
    fn invalid_names() {
        let p = pool(4);
        assert!(matches!(
            split(&p, &spec("x", &[("train", 1, None)])),
            Err(SplitError::ReservedName(_))
        ));
        assert!(matches!(
            split(&p, &spec("x", &[("a", 1, None), ("a", 1, None)])),
            Err(SplitError::DuplicateName(_))
        ));
    }

    proptest! {
        #[test]
        fn partition_is_permutation_invariant(n in 1usize..40, k in 0usize..10, rot in 0usize..40, seed in "[a-z]{0,6}") {
            let k = k.min(n);
            let p = pool(n);
            let mut shuffled: Vec<SentencePair> = p.pairs().to_vec();
            shuffled.rotate_left(rot % n);
            shuffled.reverse();
            let q = Corpus::new("pool", shuffled).unwrap();
            let s = spec(&seed, &[("test", k, None)]);
            let a = split(&p, &s).unwrap();
            let b = split(&q, &s).unwrap();
            prop_assert_eq!(ids(&a[0].1), ids(&b[0].1));
            prop_assert_eq!(ids(&a[1].1), ids(&b[1].1));
            prop_assert_eq!(a[0].1.len() + a[1].1.len(), n);
            prop_assert!(ids(&a[0].1).is_disjoint(&ids(&a[1].1)));
        }
    }
}
