use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::lang::{LanguageTag, Origin};
use crate::text::normalize_text;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorpusError {
    #[error("pair {id}: {side} text is empty")]
    EmptyText { id: String, side: &'static str },
    #[error("pair {id}: source and target language are both {lang}")]
    SameLanguage { id: String, lang: LanguageTag },
    #[error("pair {id}: {side} text contains a raw tab or newline")]
    ControlWhitespace { id: String, side: &'static str },
    #[error("pair {id}: score {score} outside [-1, 1]")]
    ScoreOutOfRange { id: String, score: f64 },
    #[error("duplicate pair id {0}")]
    DuplicateId(String),
    #[error("unknown pair id {0}")]
    UnknownId(String),
}

/// One aligned sentence pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentencePair {
    pub id: String,
    pub source_text: String,
    pub target_text: String,
    pub source_lang: LanguageTag,
    pub target_lang: LanguageTag,
    pub origin: Origin,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

impl SentencePair {
    /// Builds a pair, normalising both texts.
    pub fn new(
        id: impl Into<String>,
        source_text: &str,
        target_text: &str,
        source_lang: LanguageTag,
        target_lang: LanguageTag,
        origin: Origin,
    ) -> Result<Self, CorpusError> {
        let pair = SentencePair {
            id: id.into(),
            source_text: normalize_text(source_text),
            target_text: normalize_text(target_text),
            source_lang,
            target_lang,
            origin,
            score: None,
        };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        for (side, text) in [("source", &self.source_text), ("target", &self.target_text)] {
            if text.trim().is_empty() {
                return Err(CorpusError::EmptyText {
                    id: self.id.clone(),
                    side,
                });
            }
            if text.contains(['\t', '\n', '\r']) {
                return Err(CorpusError::ControlWhitespace {
                    id: self.id.clone(),
                    side,
                });
            }
        }
        if self.source_lang == self.target_lang {
            return Err(CorpusError::SameLanguage {
                id: self.id.clone(),
                lang: self.source_lang.clone(),
            });
        }
        if let Some(score) = self.score {
            if !(-1.0..=1.0).contains(&score) {
                return Err(CorpusError::ScoreOutOfRange {
                    id: self.id.clone(),
                    score,
                });
            }
        }
        Ok(())
    }

    /// The pair with source and target (text and language) exchanged.
    pub fn flipped(&self) -> SentencePair {
        SentencePair {
            id: self.id.clone(),
            source_text: self.target_text.clone(),
            target_text: self.source_text.clone(),
            source_lang: self.target_lang.clone(),
            target_lang: self.source_lang.clone(),
            origin: self.origin.clone(),
            score: self.score,
        }
    }
}

/// Ordered collection of sentence pairs with unique ids.
///
/// The composition map is derived from the pairs on every construction, so
/// it always agrees with a recount.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    name: String,
    pairs: Vec<SentencePair>,
    composition: BTreeMap<Origin, usize>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, pairs: Vec<SentencePair>) -> Result<Self, CorpusError> {
        let mut seen = BTreeSet::new();
        for pair in &pairs {
            pair.validate()?;
            if !seen.insert(pair.id.as_str()) {
                return Err(CorpusError::DuplicateId(pair.id.clone()));
            }
        }
        Ok(Self::from_valid(name.into(), pairs))
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Self::from_valid(name.into(), Vec::new())
    }

    /// Caller guarantees the corpus invariants already hold (e.g. a subset of
    /// a valid corpus).
    pub(crate) fn from_valid(name: String, pairs: Vec<SentencePair>) -> Self {
        let composition = recount(&pairs);
        Corpus {
            name,
            pairs,
            composition,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn pairs(&self) -> &[SentencePair] {
        &self.pairs
    }

    pub fn into_pairs(self) -> Vec<SentencePair> {
        self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn composition(&self) -> &BTreeMap<Origin, usize> {
        &self.composition
    }

    pub fn get(&self, id: &str) -> Option<&SentencePair> {
        self.pairs.iter().find(|p| p.id == id)
    }

    /// Sets the similarity score of pair `index`.
    pub fn set_score(&mut self, index: usize, score: f64) -> Result<(), CorpusError> {
        let pair = &mut self.pairs[index];
        if !(-1.0..=1.0).contains(&score) {
            return Err(CorpusError::ScoreOutOfRange {
                id: pair.id.clone(),
                score,
            });
        }
        pair.score = Some(score);
        Ok(())
    }

    /// Appends the pairs of several corpora; ids must stay unique.
    pub fn concat<'a>(
        name: impl Into<String>,
        parts: impl IntoIterator<Item = &'a Corpus>,
    ) -> Result<Corpus, CorpusError> {
        let pairs = parts
            .into_iter()
            .flat_map(|c| c.pairs.iter().cloned())
            .collect();
        Corpus::new(name, pairs)
    }
}

fn recount(pairs: &[SentencePair]) -> BTreeMap<Origin, usize> {
    let mut counts = BTreeMap::new();
    for p in pairs {
        *counts.entry(p.origin.clone()).or_insert(0) += 1;
    }
    counts
}

/// Id scheme used for freshly ingested rows.
pub fn row_id(origin: &Origin, index: usize) -> String {
    let mut id = origin.label().to_string();
    id.push(':');
    id.push_str(&index.to_string());
    id
}
