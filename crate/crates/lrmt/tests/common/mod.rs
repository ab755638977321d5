//! Shared helpers for integration tests: a throwaway HTTP server, the
//! deterministic mock translator and fixture generators.
#![allow(dead_code)]

use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};

use lrmt::bt::{Provider, ProviderError, ProviderReply};
use lrmt_core::{Corpus, LanguageTag, Origin, SentencePair};
use sha2::{Digest, Sha256};

pub struct StubRequest {
    pub method: String,
    pub url: String,
    pub authorization: Option<String>,
    pub body: String,
}

type Handler = dyn Fn(&StubRequest) -> (u16, String) + Send + Sync;

/// Minimal HTTP server on an ephemeral localhost port. Every request is
/// handled on its own thread by `handler`.
pub struct StubServer {
    pub url: String,
    server: Arc<tiny_http::Server>,
    thread: Option<JoinHandle<()>>,
    pub hits: Arc<AtomicU64>,
}

impl StubServer {
    pub fn start(handler: impl Fn(&StubRequest) -> (u16, String) + Send + Sync + 'static) -> Self {
        let server = Arc::new(tiny_http::Server::http("127.0.0.1:0").expect("bind stub server"));
        let port = server.server_addr().to_ip().expect("ip listener").port();
        let handler: Arc<Handler> = Arc::new(handler);
        let hits = Arc::new(AtomicU64::new(0));
        let thread = {
            let server = Arc::clone(&server);
            let hits = Arc::clone(&hits);
            thread::spawn(move || {
                for mut request in server.incoming_requests() {
                    let handler = Arc::clone(&handler);
                    hits.fetch_add(1, Ordering::SeqCst);
                    thread::spawn(move || {
                        let mut body = String::new();
                        let _ = request.as_reader().read_to_string(&mut body);
                        let authorization = request
                            .headers()
                            .iter()
                            .find(|h| h.field.equiv("Authorization"))
                            .map(|h| h.value.as_str().to_string());
                        let req = StubRequest {
                            method: request.method().as_str().to_string(),
                            url: request.url().to_string(),
                            authorization,
                            body,
                        };
                        let (status, reply) = handler(&req);
                        let header = tiny_http::Header::from_bytes("Content-Type", "application/json").unwrap();
                        let response = tiny_http::Response::from_string(reply)
                            .with_status_code(status)
                            .with_header(header);
                        let _ = request.respond(response);
                    });
                }
            })
        };
        StubServer {
            url: format!("http://127.0.0.1:{port}"),
            server,
            thread: Some(thread),
            hits,
        }
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::SeqCst)
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

fn digest_u64(text: &str) -> u64 {
    let d = Sha256::digest(text.as_bytes());
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// Deterministic translator: every line becomes `TRP(<line>)`. The first
/// request starting with a chosen line gets its first two outputs merged
/// into one; later requests starting with that line are answered cleanly.
pub struct MockTranslator {
    rule: FaultRule,
    faulted: Mutex<HashSet<String>>,
    pub calls: AtomicU64,
    pub faults: AtomicU64,
}

enum FaultRule {
    /// Lines whose digest is divisible by this value; 0 disables faults.
    Every(u64),
    Lines(HashSet<String>),
}

impl MockTranslator {
    /// Faults roughly `1 / fault_every` of batches, chosen by hashing.
    pub fn new(fault_every: u64) -> Self {
        Self::with_rule(FaultRule::Every(fault_every))
    }

    /// Faults exactly the requests starting with one of `lines`.
    pub fn faulting(lines: impl IntoIterator<Item = String>) -> Self {
        Self::with_rule(FaultRule::Lines(lines.into_iter().collect()))
    }

    fn with_rule(rule: FaultRule) -> Self {
        MockTranslator {
            rule,
            faulted: Mutex::new(HashSet::new()),
            calls: AtomicU64::new(0),
            faults: AtomicU64::new(0),
        }
    }

    fn chosen(&self, line: &str) -> bool {
        match &self.rule {
            FaultRule::Every(0) => false,
            FaultRule::Every(n) => digest_u64(line) % n == 0,
            FaultRule::Lines(set) => set.contains(line),
        }
    }

    pub fn respond(&self, lines: &[String]) -> Vec<String> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let mut out: Vec<String> = lines.iter().map(|l| format!("TRP({l})")).collect();
        if lines.len() > 1 && self.chosen(&lines[0]) && self.faulted.lock().unwrap().insert(lines[0].clone()) {
            self.faults.fetch_add(1, Ordering::SeqCst);
            let merged = format!("{} {}", out[0], out[1]);
            out.splice(0..2, [merged]);
        }
        out
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Provider for MockTranslator {
    fn translate(&self, _system: &str, lines: &[String]) -> Result<ProviderReply, ProviderError> {
        Ok(ProviderReply {
            lines: self.respond(lines),
            requests: 1,
        })
    }
}

/// Wraps a provider and fails every call after the first `budget` calls,
/// standing in for a process that dies mid-run.
pub struct DiesAfter<'a> {
    pub inner: &'a dyn Provider,
    pub budget: u64,
    pub used: AtomicU64,
}

impl<'a> DiesAfter<'a> {
    pub fn new(inner: &'a dyn Provider, budget: u64) -> Self {
        DiesAfter {
            inner,
            budget,
            used: AtomicU64::new(0),
        }
    }
}

impl Provider for DiesAfter<'_> {
    fn translate(&self, system: &str, lines: &[String]) -> Result<ProviderReply, ProviderError> {
        if self.used.fetch_add(1, Ordering::SeqCst) >= self.budget {
            return Err(ProviderError::Failed("killed".into()));
        }
        self.inner.translate(system, lines)
    }
}

/// A stub server speaking the provider protocol with the mock translator.
pub fn provider_server(mock: Arc<MockTranslator>) -> StubServer {
    StubServer::start(move |req| {
        let body: serde_json::Value = match serde_json::from_str(&req.body) {
            Ok(v) => v,
            Err(_) => return (400, "{}".into()),
        };
        let lines: Vec<String> = serde_json::from_value(body["lines"].clone()).unwrap_or_default();
        let out = mock.respond(&lines);
        (200, serde_json::json!({ "lines": out }).to_string())
    })
}

/// Distinct English-looking sentences.
pub fn sentences(n: usize, tag: &str) -> Vec<String> {
    (0..n).map(|i| format!("the {tag} sentence number {i} is here")).collect()
}

pub fn pair(id: &str, src: &str, tgt: &str, origin: Origin) -> SentencePair {
    SentencePair::new(id, src, tgt, LanguageTag::english(), LanguageTag::kokborok(), origin).unwrap()
}

/// `n` distinct pairs of the given origin.
pub fn corpus_of(n: usize, origin: Origin, tag: &str) -> Corpus {
    let pairs = (0..n)
        .map(|i| {
            pair(
                &format!("{}:{i}", origin.label()),
                &format!("{tag} english sentence {i} for the corpus"),
                &format!("{tag} kokborok bakhao {i} tei"),
                origin.clone(),
            )
        })
        .collect();
    Corpus::new(tag, pairs).unwrap()
}

/// Small deterministic generator for test randomness.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1)
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

pub const SMOL_DOC_ROWS: usize = 9_284;
pub const SMOL_SENT_ROWS: usize = 1_769;
pub const SYNTHETIC_ROWS: usize = 24_999;
pub const BIBLE_ROWS: usize = 1_000;

fn tsv_rows(tag: &str, n: usize, dup_every: usize) -> String {
    let mut out = String::new();
    for i in 0..n {
        let line = format!("{tag} line {i} about the hills and rivers\t{tag} bwsa {i} kokborok tei\n");
        out.push_str(&line);
        if dup_every > 0 && i % dup_every == dup_every - 1 {
            out.push_str(&line);
        }
    }
    out
}

/// Writes stand-in source files and a recipe shaped like the full corpus
/// build: ingest, dedup, length filter, split, overlap check and flip.
/// Sizes after cleaning are 9,284 + 1,769 + 24,999 training pairs, with
/// 1,000 held-out rows split into dev and test. Returns the recipe path.
pub fn write_full_fixture(dir: &std::path::Path) -> std::path::PathBuf {
    use std::fs;
    let data = dir.join("data");
    fs::create_dir_all(&data).unwrap();
    // Duplicates every 500th row: 18 extra smol_doc rows, 3 extra smol_sent rows.
    fs::write(data.join("smol_doc.tsv"), tsv_rows("smoldoc", SMOL_DOC_ROWS, 500)).unwrap();
    fs::write(data.join("smol_sent.tsv"), tsv_rows("smolsent", SMOL_SENT_ROWS, 500)).unwrap();
    fs::write(data.join("wmt_bible.tsv"), tsv_rows("bible", BIBLE_ROWS, 0)).unwrap();
    let mut synthetic = String::new();
    for i in 0..SYNTHETIC_ROWS {
        let row = serde_json::json!({
            "source": format!("synthetic line {i} about the hills and rivers"),
            "target": format!("TRP(synthetic line {i})"),
        });
        synthetic.push_str(&row.to_string());
        synthetic.push('\n');
        if i % 1000 == 0 {
            let long = format!("synthetic overlong line {i} {}", "word ".repeat(25));
            let row = serde_json::json!({ "source": long.trim_end(), "target": "TRP(long)" });
            synthetic.push_str(&row.to_string());
            synthetic.push('\n');
        }
    }
    fs::write(data.join("synthetic.jsonl"), synthetic).unwrap();
    fs::write(
        data.join("split.json"),
        serde_json::json!({
            "seed": "heldout-v1",
            "splits": [
                { "name": "dev", "count": 500, "restrict_origin": "wmt_bible" },
                { "name": "test", "count": 500, "restrict_origin": "wmt_bible" }
            ]
        })
        .to_string(),
    )
    .unwrap();
    let recipe = serde_json::json!({
        "recipe_version": 1,
        "workspace": "work",
        "stages": [
            { "id": "ingest", "op": "ingest", "params": {
                "in": ["../data/smol_doc.tsv", "../data/smol_sent.tsv", "../data/synthetic.jsonl", "../data/wmt_bible.tsv"],
                "origin": ["smol_doc", "smol_sent", "synthetic", "wmt_bible"],
                "out": "pool.jsonl" } },
            { "id": "dedup", "op": "dedup", "params": { "in": "pool.jsonl", "out": "dedup.jsonl" } },
            { "id": "length", "op": "filter-length", "params": { "in": "dedup.jsonl", "out": "clean.jsonl", "min": 5, "max": 20 } },
            { "id": "split", "op": "split", "params": { "in": "clean.jsonl", "spec": "../data/split.json", "out_dir": "splits" } },
            { "id": "overlap", "op": "verify-overlap", "params": { "train": "splits/train.jsonl", "eval": ["splits/dev.jsonl", "splits/test.jsonl"], "out": "overlap.json" } },
            { "id": "flip", "op": "flip", "params": { "in": "splits/train.jsonl", "out": "train_bidir.jsonl" } }
        ]
    });
    let path = dir.join("recipe.json");
    fs::write(&path, serde_json::to_string_pretty(&recipe).unwrap()).unwrap();
    path
}
