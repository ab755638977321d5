//! Corpus file formats (TSV and JSONL) and small filesystem helpers.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lrmt_core::corpus::row_id;
use lrmt_core::{Corpus, CorpusError, LanguageTag, Origin, SentencePair};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Tsv,
    Jsonl,
}

impl Format {
    /// `.tsv` means TSV; anything else is read and written as JSONL.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("tsv") => Format::Tsv,
            _ => Format::Jsonl,
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tsv" => Ok(Format::Tsv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(format!("unknown format {other:?} (expected tsv or jsonl)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub format: Format,
    pub source_lang: LanguageTag,
    pub target_lang: LanguageTag,
    /// Origin for rows that do not carry their own.
    pub origin: Origin,
    /// Skip the first TSV row.
    pub header: bool,
}

impl IngestOptions {
    pub fn new(format: Format, origin: Origin) -> Self {
        IngestOptions {
            format,
            source_lang: LanguageTag::english(),
            target_lang: LanguageTag::kokborok(),
            origin,
            header: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MalformedRow {
    /// 1-based physical line number.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub path: String,
    pub rows: usize,
    pub accepted: usize,
    pub malformed: Vec<MalformedRow>,
}

/// Ingestion gives up when more than this share of rows is malformed.
pub const MAX_MALFORMED_PERCENT: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: invalid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { path: String, offset: usize },
    #[error("{path}: {malformed} of {rows} rows are malformed; wrong format?")]
    TooManyMalformed { path: String, malformed: usize, rows: usize },
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Read { .. } => Failure::external(e.to_string()),
            _ => Failure::validation(e.to_string()),
        }
    }
}

/// Escapes a field for TSV output. Backslash is escaped too so that the
/// mapping is reversible.
pub fn escape_tsv(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    for c in field.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape_tsv(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

fn corpus_name(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("corpus")
        .to_string()
}

/// Reads a corpus file.
pub fn ingest(path: &Path, opts: &IngestOptions) -> Result<(Corpus, IngestReport), IngestError> {
    let display = path.display().to_string();
    let bytes = fs::read(path).map_err(|source| IngestError::Read {
        path: display.clone(),
        source,
    })?;
    parse_corpus(&corpus_name(path), &display, &bytes, opts)
}

/// Reads a corpus written by this tool, inferring the format from the
/// extension.
pub fn read_corpus(path: &Path) -> Result<Corpus, IngestError> {
    let opts = IngestOptions::new(Format::from_path(path), Origin::Other("external".into()));
    Ok(ingest(path, &opts)?.0)
}

/// Parses corpus bytes. `name` becomes the corpus name; `display` is used in
/// messages.
pub fn parse_corpus(
    name: &str,
    display: &str,
    bytes: &[u8],
    opts: &IngestOptions,
) -> Result<(Corpus, IngestReport), IngestError> {
    let text = validate_utf8(display, bytes)?;
    let mut lines: Vec<&str> = text.split('\n').collect();
    if lines.last() == Some(&"") {
        lines.pop();
    }
    let skip = usize::from(opts.header && opts.format == Format::Tsv);

    let mut pairs = Vec::new();
    let mut malformed = Vec::new();
    let mut seen = BTreeSet::new();
    let mut rows = 0;
    for (line_idx, raw) in lines.iter().enumerate().skip(skip) {
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if opts.format == Format::Jsonl && raw.trim().is_empty() {
            continue;
        }
        let row = line_idx - skip;
        rows += 1;
        let parsed = match opts.format {
            Format::Tsv => parse_tsv_row(raw, row, opts),
            Format::Jsonl => parse_jsonl_row(raw, row, opts),
        };
        match parsed {
            Ok(pair) if !seen.insert(pair.id.clone()) => malformed.push(MalformedRow {
                line: line_idx + 1,
                reason: format!("duplicate id {:?}", pair.id),
            }),
            Ok(pair) => pairs.push(pair),
            Err(reason) => malformed.push(MalformedRow { line: line_idx + 1, reason }),
        }
    }

    if malformed.len() * 100 > rows * MAX_MALFORMED_PERCENT {
        return Err(IngestError::TooManyMalformed {
            path: display.to_string(),
            malformed: malformed.len(),
            rows,
        });
    }
    let report = IngestReport {
        path: display.to_string(),
        rows,
        accepted: pairs.len(),
        malformed,
    };
    let corpus = Corpus::new(name, pairs).expect("ids were checked for uniqueness");
    Ok((corpus, report))
}

fn validate_utf8<'a>(display: &str, bytes: &'a [u8]) -> Result<&'a str, IngestError> {
    std::str::from_utf8(bytes).map_err(|e| IngestError::InvalidUtf8 {
        path: display.to_string(),
        offset: e.valid_up_to(),
    })
}

fn parse_tsv_row(raw: &str, row: usize, opts: &IngestOptions) -> Result<SentencePair, String> {
    let mut cols = raw.split('\t');
    let (Some(src), Some(tgt)) = (cols.next(), cols.next()) else {
        return Err("expected at least 2 tab-separated columns".into());
    };
    SentencePair::new(
        row_id(&opts.origin, row),
        &unescape_tsv(src),
        &unescape_tsv(tgt),
        opts.source_lang.clone(),
        opts.target_lang.clone(),
        opts.origin.clone(),
    )
    .map_err(|e| e.to_string())
}

fn string_field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<Option<&'a str>, String> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(_) => Err(format!("field {key:?} must be a string")),
    }
}

fn parse_jsonl_row(raw: &str, row: usize, opts: &IngestOptions) -> Result<SentencePair, String> {
    let value: Value = serde_json::from_str(raw).map_err(|e| format!("invalid JSON: {e}"))?;
    let Value::Object(obj) = value else {
        return Err("expected a JSON object".into());
    };
    let source = string_field(&obj, "source")?.ok_or("missing field \"source\"")?;
    let target = string_field(&obj, "target")?.ok_or("missing field \"target\"")?;
    let origin = match string_field(&obj, "origin")? {
        Some(label) => label.parse::<Origin>().map_err(|e| e.to_string())?,
        None => opts.origin.clone(),
    };
    let lang = |key: &str, default: &LanguageTag| -> Result<LanguageTag, String> {
        match string_field(&obj, key)? {
            Some(tag) => LanguageTag::new(tag).map_err(|e| e.to_string()),
            None => Ok(default.clone()),
        }
    };
    let source_lang = lang("source_lang", &opts.source_lang)?;
    let target_lang = lang("target_lang", &opts.target_lang)?;
    let id = match string_field(&obj, "id")? {
        Some(id) => id.to_string(),
        None => row_id(&origin, row),
    };
    let mut pair = SentencePair::new(id, source, target, source_lang, target_lang, origin)
        .map_err(|e| e.to_string())?;
    match obj.get("score") {
        None | Some(Value::Null) => {}
        Some(Value::Number(n)) => pair.score = n.as_f64(),
        Some(_) => return Err("field \"score\" must be a number".into()),
    }
    pair.validate().map_err(|e: CorpusError| e.to_string())?;
    Ok(pair)
}

#[derive(Serialize)]
struct JsonlRow<'a> {
    id: &'a str,
    source: &'a str,
    target: &'a str,
    source_lang: &'a str,
    target_lang: &'a str,
    origin: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
}

/// Serialises a corpus. TSV keeps only the two text columns.
pub fn render_corpus(corpus: &Corpus, format: Format) -> String {
    let mut out = String::new();
    for p in corpus.pairs() {
        match format {
            Format::Tsv => {
                let _ = writeln!(out, "{}\t{}", escape_tsv(&p.source_text), escape_tsv(&p.target_text));
            }
            Format::Jsonl => {
                let row = JsonlRow {
                    id: &p.id,
                    source: &p.source_text,
                    target: &p.target_text,
                    source_lang: p.source_lang.as_str(),
                    target_lang: p.target_lang.as_str(),
                    origin: p.origin.label(),
                    score: p.score,
                };
                out.push_str(&serde_json::to_string(&row).expect("plain data serialises"));
                out.push('\n');
            }
        }
    }
    out
}

pub fn write_corpus(corpus: &Corpus, path: &Path, format: Format) -> std::io::Result<()> {
    write_atomic(path, render_corpus(corpus, format).as_bytes())
}

/// Writes via a sibling temporary file and a rename, so readers never see a
/// half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// Reads a plain text file as lines, dropping the final empty line and any
/// carriage returns.
pub fn read_lines(path: &Path) -> Result<Vec<String>, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::external(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| {
        Failure::validation(format!("{}: invalid UTF-8 at byte offset {}", path.display(), e.valid_up_to()))
    })?;
    let mut lines: Vec<String> = text
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
        .collect();
    if lines.last().is_some_and(String::is_empty) {
        lines.pop();
    }
    Ok(lines)
}
