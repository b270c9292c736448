//! Corpus ingestion: parsing, validation, diachronic grouping and splits.
//!
//! A corpus file is UTF-8 with one JSON object per line. Each record carries
//! the string fields `author`, `title`, `collection`, `family`, `type`
//! (`poetry` or `prose`) and `text`. Verse structure is encoded inside
//! `text` with the literal tags `<EOL>` (end of verse line) and `<EOS>`
//! (end of stanza or paragraph).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const EOL_TAG: &str = "<EOL>";
pub const EOS_TAG: &str = "<EOS>";

/// Composition kind. Correspondence is folded into prose upstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Poetry,
    Prose,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Poetry => "poetry",
            Kind::Prose => "prose",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One composition: a poem, a chapter, a letter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub author: String,
    pub title: String,
    pub collection: String,
    pub family: String,
    #[serde(rename = "type")]
    pub kind: Kind,
    pub text: String,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus file: {0}")]
    Io(#[from] std::io::Error),
    #[error("no valid records in corpus file")]
    Empty,
    #[error("strict mode: {0} invalid record(s)")]
    Strict(usize),
    #[error("family '{family}' is not covered by the group mapping")]
    UnmappedFamily { family: String },
    #[error("group '{0}' has fewer than 2 documents and cannot be split")]
    TooSmallToSplit(String),
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    BadFraction(f64),
    #[error("cannot read mapping file: {0}")]
    BadMapping(String),
}

/// A record-level validation failure. Collected, not fatal, unless the
/// caller asks for strict parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordIssue {
    /// 1-based line number in the source file.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for RecordIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Parsed corpus plus family/author indices into the document list.
#[derive(Debug, Clone)]
pub struct Corpus {
    documents: Vec<Document>,
    family_index: BTreeMap<String, Vec<usize>>,
    author_index: BTreeMap<String, Vec<usize>>,
}

impl Corpus {
    pub fn from_documents(documents: Vec<Document>) -> Self {
        let mut family_index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut author_index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, doc) in documents.iter().enumerate() {
            family_index.entry(doc.family.clone()).or_default().push(i);
            author_index.entry(doc.author.clone()).or_default().push(i);
        }
        Corpus {
            documents,
            family_index,
            author_index,
        }
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Family names present, sorted.
    pub fn families(&self) -> impl Iterator<Item = &str> {
        self.family_index.keys().map(|s| s.as_str())
    }

    pub fn authors(&self) -> impl Iterator<Item = &str> {
        self.author_index.keys().map(|s| s.as_str())
    }

    pub fn family_documents(&self, family: &str) -> &[usize] {
        self.family_index.get(family).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn author_documents(&self, author: &str) -> &[usize] {
        self.author_index.get(author).map(Vec::as_slice).unwrap_or(&[])
    }

    /// One JSON record per line, field-identical to what `parse_corpus`
    /// accepts. Reparsing the output yields the same documents.
    pub fn to_record_lines(&self) -> String {
        let mut out = String::new();
        for doc in &self.documents {
            out.push_str(&serde_json::to_string(doc).expect("document serializes"));
            out.push('\n');
        }
        out
    }
}

/// Result of a parse: the valid documents plus per-line issues.
#[derive(Debug)]
pub struct ParseOutcome {
    pub corpus: Corpus,
    pub issues: Vec<RecordIssue>,
}

fn validate_document(doc: &Document) -> Result<(), String> {
    if doc.author.trim().is_empty() {
        return Err("author is empty".into());
    }
    if strip_markup(&doc.text).is_empty() {
        return Err("text is empty after markup stripping".into());
    }
    match doc.kind {
        Kind::Poetry => {
            if !doc.text.contains(EOL_TAG) && !doc.text.contains(EOS_TAG) {
                return Err(format!(
                    "poetry text contains neither {EOL_TAG} nor {EOS_TAG}"
                ));
            }
        }
        Kind::Prose => {
            if doc.text.contains(EOL_TAG) {
                return Err(format!("prose text contains {EOL_TAG}"));
            }
        }
    }
    Ok(())
}

fn parse_record(line: &str) -> Result<Document, String> {
    let mut doc: Document = serde_json::from_str(line).map_err(|e| e.to_string())?;
    doc.family = doc.family.trim().to_string();
    validate_document(&doc)?;
    Ok(doc)
}

/// Parse a corpus from already-loaded file contents.
///
/// Invalid records are reported with their line numbers and skipped; the
/// parse fails only when the input yields zero valid documents.
pub fn parse_corpus_str(contents: &str) -> Result<ParseOutcome, CorpusError> {
    let mut documents = Vec::new();
    let mut issues = Vec::new();
    for (idx, line) in contents.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_record(line) {
            Ok(doc) => documents.push(doc),
            Err(message) => issues.push(RecordIssue {
                line: idx + 1,
                message,
            }),
        }
    }
    if documents.is_empty() {
        return Err(CorpusError::Empty);
    }
    Ok(ParseOutcome {
        corpus: Corpus::from_documents(documents),
        issues,
    })
}

pub fn parse_corpus(path: impl AsRef<Path>) -> Result<ParseOutcome, CorpusError> {
    let contents = std::fs::read_to_string(path)?;
    parse_corpus_str(&contents)
}

/// Replace every `<EOL>`/`<EOS>` tag with a newline and normalize
/// whitespace: any whitespace run containing a newline collapses to a single
/// newline, any other run to a single space; the ends are trimmed.
pub fn strip_markup(text: &str) -> String {
    let replaced = text.replace(EOL_TAG, "\n").replace(EOS_TAG, "\n");
    let mut out = String::with_capacity(replaced.len());
    let mut run_has_newline = false;
    let mut in_run = false;
    for ch in replaced.chars() {
        if ch.is_whitespace() {
            in_run = true;
            run_has_newline |= ch == '\n';
        } else {
            if in_run {
                if !out.is_empty() {
                    out.push(if run_has_newline { '\n' } else { ' ' });
                }
                in_run = false;
                run_has_newline = false;
            }
            out.push(ch);
        }
    }
    out
}

/// A named diachronic subcorpus.
#[derive(Debug, Clone)]
pub struct CorpusGroup {
    pub name: String,
    pub families: Vec<String>,
    pub documents: Vec<Document>,
}

/// The bundled family -> period mapping: the ten 13th-century families go to
/// XIII, Boccaccio and Petrarca to XIV, Ariosto and Tasso to the two
/// 15th/16th-century groups.
pub fn default_group_mapping() -> BTreeMap<String, String> {
    let pairs: &[(&str, &str)] = &[
        ("Archaic text", "XIII"),
        ("Sicilian School", "XIII"),
        ("Northern Didactic poetry", "XIII"),
        ("Northern/Tuscan Courtly poetry", "XIII"),
        ("Central Italy Didactic poetry", "XIII"),
        ("Folk and Giullaresca poetry", "XIII"),
        ("Laude", "XIII"),
        ("Stilnovisti", "XIII"),
        ("Realistic Tuscan poetry", "XIII"),
        ("Similar to Stilnovisti", "XIII"),
        ("Boccaccio", "XIV"),
        ("Petrarca", "XIV"),
        ("Ariosto", "XV-XVI-1"),
        ("Tasso", "XV-XVI-2"),
    ];
    pairs
        .iter()
        .map(|(f, g)| (f.to_string(), g.to_string()))
        .collect()
}

pub fn parse_group_mapping(contents: &str) -> Result<BTreeMap<String, String>, CorpusError> {
    serde_json::from_str(contents).map_err(|e| CorpusError::BadMapping(e.to_string()))
}

/// Partition the corpus into named groups according to a family -> group
/// mapping. Every family present in the corpus must be mapped. Groups are
/// returned in lexicographic name order; mapped groups that received no
/// documents are retained (empty).
pub fn group_by_period(
    corpus: &Corpus,
    mapping: &BTreeMap<String, String>,
) -> Result<Vec<CorpusGroup>, CorpusError> {
    for family in corpus.families() {
        if !mapping.contains_key(family) {
            return Err(CorpusError::UnmappedFamily {
                family: family.to_string(),
            });
        }
    }
    let mut groups: BTreeMap<String, CorpusGroup> = BTreeMap::new();
    for group_name in mapping.values() {
        groups.entry(group_name.clone()).or_insert_with(|| CorpusGroup {
            name: group_name.clone(),
            families: Vec::new(),
            documents: Vec::new(),
        });
    }
    for (family, group_name) in mapping {
        let group = groups.get_mut(group_name).expect("group inserted above");
        group.families.push(family.clone());
    }
    for doc in corpus.documents() {
        let group_name = &mapping[&doc.family];
        groups
            .get_mut(group_name)
            .expect("group inserted above")
            .documents
            .push(doc.clone());
    }
    Ok(groups.into_values().collect())
}

/// How to cut a group into train and heldout documents.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.9,
            seed: 0,
        }
    }
}

fn split_indices(n: usize, fraction: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let take = ((fraction * n as f64).round() as usize).clamp(1, n - 1);
    let heldout = order.split_off(take);
    (order, heldout)
}

/// Document-level split, deterministic under the given seed. When both
/// kinds are present each kind is split independently at the same fraction;
/// if that would leave either side empty (single-document kinds) the split
/// falls back to an unstratified cut.
pub fn split_train_heldout(
    group: &CorpusGroup,
    spec: &SplitSpec,
) -> Result<(Vec<Document>, Vec<Document>), CorpusError> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(CorpusError::BadFraction(spec.train_fraction));
    }
    let n = group.documents.len();
    if n < 2 {
        return Err(CorpusError::TooSmallToSplit(group.name.clone()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let by_kind = |kind: Kind| -> Vec<usize> {
        group
            .documents
            .iter()
            .enumerate()
            .filter(|(_, d)| d.kind == kind)
            .map(|(i, _)| i)
            .collect()
    };
    let poetry = by_kind(Kind::Poetry);
    let prose = by_kind(Kind::Prose);

    let mut train_idx = Vec::new();
    let mut heldout_idx = Vec::new();
    if !poetry.is_empty() && !prose.is_empty() && poetry.len() >= 2 && prose.len() >= 2 {
        for stratum in [&poetry, &prose] {
            let (tr, he) = split_indices(stratum.len(), spec.train_fraction, &mut rng);
            train_idx.extend(tr.into_iter().map(|i| stratum[i]));
            heldout_idx.extend(he.into_iter().map(|i| stratum[i]));
        }
    } else {
        let (tr, he) = split_indices(n, spec.train_fraction, &mut rng);
        train_idx = tr;
        heldout_idx = he;
    }
    train_idx.sort_unstable();
    heldout_idx.sort_unstable();
    let train = train_idx.iter().map(|&i| group.documents[i].clone()).collect();
    let heldout = heldout_idx
        .iter()
        .map(|&i| group.documents[i].clone())
        .collect();
    Ok((train, heldout))
}
