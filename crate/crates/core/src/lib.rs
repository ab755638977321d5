//! Core algorithms for building and evaluating low-resource machine translation
//! corpora.
//!
//! Everything here is pure computation over in-memory values and builds
//! without `std` (only `alloc` is required). File formats, HTTP clients,
//! checkpoints and the command-line tool live in the `lrmt` crate.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`corpus`], [`lang`], [`text`]: domain types and text canonicalisation.
//! * [`pipeline`]: dedup, length filtering, swapped-column repair, seeded
//!   splitting, overlap verification and bidirectional export.
//! * [`metrics`]: BLEU, chrF, TER, ROUGE-L and a METEOR variant.
//! * [`quality`]: embedding-similarity statistics and retention curves.
//! * [`bt`]: batch planning, response validation and bisection retry for
//!   back-translation jobs.
//! * [`humaneval`]: rating tables and Cohen's kappa.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bt;
pub mod corpus;
pub mod hashkey;
pub mod humaneval;
pub mod lang;
pub mod metrics;
pub mod pipeline;
pub mod quality;
pub mod text;

pub use corpus::{Corpus, CorpusError, SentencePair};
pub use lang::{LanguageTag, Origin};
