use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::corpus::{Corpus, CorpusError};

/// Lower-cased word list used by [`detect_swapped_rows`].
#[derive(Debug, Clone, Default)]
pub struct Stopwords(BTreeSet<String>);

impl Stopwords {
    /// Parses one word per line; `#` starts a comment line.
    pub fn parse(text: &str) -> Self {
        Stopwords(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| l.to_lowercase())
                .collect(),
        )
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

/// The bundled English function-word list.
pub fn default_stopwords() -> Stopwords {
    Stopwords::parse(DEFAULT_STOPWORDS)
}

/// Fraction of words in `text` found in `stopwords`, after lower-casing and
/// stripping surrounding punctuation. Texts with no words score 0.
pub fn stopword_ratio(text: &str, stopwords: &Stopwords) -> f64 {
    let mut words = 0usize;
    let mut hits = 0usize;
    for raw in text.split_whitespace() {
        let word = raw.trim_matches(|c: char| !c.is_alphanumeric());
        if word.is_empty() {
            continue;
        }
        words += 1;
        if stopwords.contains(&word.to_lowercase()) {
            hits += 1;
        }
    }
    if words == 0 {
        0.0
    } else {
        hits as f64 / words as f64
    }
}

const SOURCE_RATIO_CEILING: f64 = 0.05;

/// Ids of pairs that look like the target column holds the English text.
///
/// A pair is flagged when its target scores strictly higher than its source
/// on stopword ratio and the source scores below 0.05.
pub fn detect_swapped_rows(corpus: &Corpus, stopwords: &Stopwords) -> Vec<String> {
    corpus
        .pairs()
        .iter()
        .filter(|p| {
            let src = stopword_ratio(&p.source_text, stopwords);
            let tgt = stopword_ratio(&p.target_text, stopwords);
            tgt > src && src < SOURCE_RATIO_CEILING
        })
        .map(|p| p.id.clone())
        .collect()
}

/// Exchanges source and target text for the listed ids. Language tags are
/// left untouched.
pub fn swap_rows(corpus: &Corpus, ids: &[String]) -> Result<Corpus, CorpusError> {
    let wanted: BTreeSet<&str> = ids.iter().map(String::as_str).collect();
    let present: BTreeSet<&str> = corpus.pairs().iter().map(|p| p.id.as_str()).collect();
    if let Some(missing) = wanted.iter().find(|id| !present.contains(**id)) {
        return Err(CorpusError::UnknownId(missing.to_string()));
    }
    let pairs = corpus
        .pairs()
        .iter()
        .map(|p| {
            let mut p = p.clone();
            if wanted.contains(p.id.as_str()) {
                core::mem::swap(&mut p.source_text, &mut p.target_text);
            }
            p
        })
        .collect();
    Ok(Corpus::from_valid(corpus.name().into(), pairs))
}
