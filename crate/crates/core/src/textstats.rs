//! Corpus statistics: word counts per kind, per-family breakdowns, group
//! proportions and length distributions.
//!
//! A "word" here is a whitespace-separated token with leading and trailing
//! non-alphanumeric characters stripped, case preserved. All published
//! counts depend on this convention, so it is fixed and documented rather
//! than configurable.

use std::collections::{BTreeMap, HashSet};

use crate::corpus::{strip_markup, Corpus, CorpusGroup, Document, Kind};

/// Word-occurrence statistics for one slice of the corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordStats {
    pub total_occurrences: u64,
    pub unique_words: u64,
    pub avg_occurrences_per_word: f64,
}

impl WordStats {
    /// The average is total/unique, zero when there are no words. Values are
    /// kept at full precision; rounding happens only at display time.
    pub fn from_totals(total_occurrences: u64, unique_words: u64) -> Self {
        let avg = if unique_words == 0 {
            0.0
        } else {
            total_occurrences as f64 / unique_words as f64
        };
        WordStats {
            total_occurrences,
            unique_words,
            avg_occurrences_per_word: avg,
        }
    }
}

/// Per-family text and word counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyRow {
    pub family: String,
    pub texts: u64,
    pub poetry_texts: u64,
    pub prose_texts: u64,
    pub word_occurrences: u64,
    pub prose_word_occurrences: u64,
}

#[derive(Debug, Clone, Default)]
pub struct FamilyBreakdown {
    pub rows: Vec<FamilyRow>,
}

impl FamilyBreakdown {
    pub fn total_texts(&self) -> u64 {
        self.rows.iter().map(|r| r.texts).sum()
    }

    pub fn total_word_occurrences(&self) -> u64 {
        self.rows.iter().map(|r| r.word_occurrences).sum()
    }
}

/// Mean text and collection lengths for one family and kind.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthRow {
    pub family: String,
    pub kind: Kind,
    pub mean_text_length: f64,
    pub mean_collection_length: f64,
}

/// Split on whitespace, then strip leading/trailing non-alphanumeric
/// characters from each token; empty tokens are dropped, case is preserved.
pub fn tokenize_words(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|tok| tok.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|tok| !tok.is_empty())
        .map(str::to_string)
        .collect()
}

fn document_words(doc: &Document) -> Vec<String> {
    tokenize_words(&strip_markup(&doc.text))
}

/// Totals, distinct words and mean occurrences over a document set.
pub fn word_stats<'a>(docs: impl IntoIterator<Item = &'a Document>) -> WordStats {
    let mut total = 0u64;
    let mut seen: HashSet<String> = HashSet::new();
    for doc in docs {
        for word in document_words(doc) {
            total += 1;
            seen.insert(word);
        }
    }
    WordStats::from_totals(total, seen.len() as u64)
}

/// One row per family present in the corpus, sorted by family name.
pub fn family_breakdown(corpus: &Corpus) -> FamilyBreakdown {
    let mut rows = Vec::new();
    for family in corpus.families().map(str::to_string).collect::<Vec<_>>() {
        let mut row = FamilyRow {
            family: family.clone(),
            texts: 0,
            poetry_texts: 0,
            prose_texts: 0,
            word_occurrences: 0,
            prose_word_occurrences: 0,
        };
        for &i in corpus.family_documents(&family) {
            let doc = &corpus.documents()[i];
            let words = document_words(doc).len() as u64;
            row.texts += 1;
            row.word_occurrences += words;
            match doc.kind {
                Kind::Poetry => row.poetry_texts += 1,
                Kind::Prose => {
                    row.prose_texts += 1;
                    row.prose_word_occurrences += words;
                }
            }
        }
        rows.push(row);
    }
    FamilyBreakdown { rows }
}

/// Per-group word statistics plus each group's share of the total
/// occurrences, in percent.
#[derive(Debug, Clone)]
pub struct GroupStats {
    pub group: String,
    pub stats: WordStats,
    pub proportion_pct: f64,
}

pub fn group_stats(groups: &[CorpusGroup]) -> Vec<GroupStats> {
    let per_group: Vec<WordStats> = groups
        .iter()
        .map(|g| word_stats(g.documents.iter()))
        .collect();
    let total: u64 = per_group.iter().map(|s| s.total_occurrences).sum();
    groups
        .iter()
        .zip(per_group)
        .map(|(g, stats)| GroupStats {
            group: g.name.clone(),
            stats,
            proportion_pct: if total == 0 {
                0.0
            } else {
                100.0 * stats.total_occurrences as f64 / total as f64
            },
        })
        .collect()
}

/// Proportions computed straight from word totals, used when the counts are
/// already known.
pub fn proportions_pct(word_counts: &[u64]) -> Vec<f64> {
    let total: u64 = word_counts.iter().sum();
    word_counts
        .iter()
        .map(|&c| {
            if total == 0 {
                0.0
            } else {
                100.0 * c as f64 / total as f64
            }
        })
        .collect()
}

/// Mean words per text and per collection, one row per (family, kind) with
/// at least one text. Families with zero texts of a kind are excluded.
pub fn length_distribution(corpus: &Corpus) -> Vec<LengthRow> {
    let mut rows = Vec::new();
    for family in corpus.families().map(str::to_string).collect::<Vec<_>>() {
        for kind in [Kind::Poetry, Kind::Prose] {
            let docs: Vec<&Document> = corpus
                .family_documents(&family)
                .iter()
                .map(|&i| &corpus.documents()[i])
                .filter(|d| d.kind == kind)
                .collect();
            if docs.is_empty() {
                continue;
            }
            let mut per_collection: BTreeMap<&str, u64> = BTreeMap::new();
            let mut total_words = 0u64;
            for doc in &docs {
                let words = document_words(doc).len() as u64;
                total_words += words;
                *per_collection.entry(doc.collection.as_str()).or_default() += words;
            }
            rows.push(LengthRow {
                family: family.clone(),
                kind,
                mean_text_length: total_words as f64 / docs.len() as f64,
                mean_collection_length: total_words as f64 / per_collection.len() as f64,
            });
        }
    }
    rows
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// CSV with header `family,texts,poetry,prose,words,prose_words`.
pub fn family_breakdown_csv(breakdown: &FamilyBreakdown) -> String {
    let mut out = String::from("family,texts,poetry,prose,words,prose_words\n");
    for r in &breakdown.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_field(&r.family),
            r.texts,
            r.poetry_texts,
            r.prose_texts,
            r.word_occurrences,
            r.prose_word_occurrences
        ));
    }
    out
}

/// CSV with header `group,words,proportion_pct,unique,avg_occ`.
pub fn group_stats_csv(stats: &[GroupStats]) -> String {
    let mut out = String::from("group,words,proportion_pct,unique,avg_occ\n");
    for s in stats {
        out.push_str(&format!(
            "{},{},{:.2},{},{:.2}\n",
            csv_field(&s.group),
            s.stats.total_occurrences,
            s.proportion_pct,
            s.stats.unique_words,
            s.stats.avg_occurrences_per_word
        ));
    }
    out
}

/// CSV with per-kind word statistics (global, poetry, prose rows).
pub fn word_stats_csv(corpus: &Corpus) -> String {
    let global = word_stats(corpus.documents());
    let poetry = word_stats(corpus.documents().iter().filter(|d| d.kind == Kind::Poetry));
    let prose = word_stats(corpus.documents().iter().filter(|d| d.kind == Kind::Prose));
    let mut out = String::from("category,word_occurrences,unique_words,avg_occurrences\n");
    for (name, s) in [("global", global), ("poetry", poetry), ("prose", prose)] {
        out.push_str(&format!(
            "{},{},{},{:.2}\n",
            name, s.total_occurrences, s.unique_words, s.avg_occurrences_per_word
        ));
    }
    out
}

/// CSV with header `family,kind,mean_text_length,mean_collection_length`.
pub fn length_distribution_csv(rows: &[LengthRow]) -> String {
    let mut out = String::from("family,kind,mean_text_length,mean_collection_length\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.2},{:.2}\n",
            csv_field(&r.family),
            r.kind,
            r.mean_text_length,
            r.mean_collection_length
        ));
    }
    out
}

/// Stacked horizontal bar chart of word occurrences per family, the prose
/// share drawn darker.
pub fn family_words_svg(breakdown: &FamilyBreakdown) -> String {
    crate::svg::family_bars(breakdown)
}
