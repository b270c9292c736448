//! Token vocabularies and document encoding for the neural model.
//!
//! Five special ids are always present, in fixed positions: the sequence
//! boundary, the unknown token, the whitespace token, end of verse and end
//! of stanza/paragraph. Regular tokens follow, ordered by descending
//! frequency with ties broken lexicographically, so vocabularies are
//! deterministic for a given training set.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Kind, EOL_TAG, EOS_TAG};
use crate::nlm::NlmError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Char,
    Word,
}

pub const BOUNDARY_ID: u32 = 0;
pub const UNKNOWN_ID: u32 = 1;
pub const WHITESPACE_ID: u32 = 2;
pub const EOL_ID: u32 = 3;
pub const EOS_ID: u32 = 4;
pub const NUM_SPECIALS: usize = 5;

const SPECIAL_TOKENS: [&str; NUM_SPECIALS] = ["<BND>", "<UNK>", "<WS>", EOL_TAG, EOS_TAG];

/// Exact token <-> id bijection with the five specials pinned first.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    granularity: Granularity,
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

/// Vocabulary construction limits. `min_count` applies in char mode,
/// `top_k` caps the word-mode vocabulary (most frequent words kept).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VocabOptions {
    pub min_count: u64,
    pub top_k: usize,
}

impl Default for VocabOptions {
    fn default() -> Self {
        VocabOptions {
            min_count: 1,
            top_k: 50_000,
        }
    }
}

/// Lexical scan events shared by vocabulary building and encoding.
enum ScanItem<'a> {
    Eol,
    Eos,
    Whitespace,
    Piece(&'a str),
}

/// Walk the raw (tagged) text and emit one event per token. Char mode emits
/// single characters and collapses whitespace runs; word mode emits
/// punctuation-trimmed words and no whitespace events.
fn scan_events<F: FnMut(ScanItem<'_>)>(text: &str, granularity: Granularity, mut f: F) {
    match granularity {
        Granularity::Char => {
            let mut i = 0;
            let mut in_ws = false;
            while i < text.len() {
                let rest = &text[i..];
                if rest.starts_with(EOL_TAG) || rest.starts_with(EOS_TAG) {
                    if in_ws {
                        f(ScanItem::Whitespace);
                        in_ws = false;
                    }
                    f(if rest.starts_with(EOL_TAG) {
                        ScanItem::Eol
                    } else {
                        ScanItem::Eos
                    });
                    i += EOL_TAG.len();
                    continue;
                }
                let ch = rest.chars().next().expect("non-empty rest");
                if ch.is_whitespace() {
                    in_ws = true;
                } else {
                    if in_ws {
                        f(ScanItem::Whitespace);
                        in_ws = false;
                    }
                    f(ScanItem::Piece(&text[i..i + ch.len_utf8()]));
                }
                i += ch.len_utf8();
            }
            if in_ws {
                f(ScanItem::Whitespace);
            }
        }
        Granularity::Word => {
            // Tags may sit flush against words; isolate them before splitting.
            let spaced = text
                .replace(EOL_TAG, &format!(" {EOL_TAG} "))
                .replace(EOS_TAG, &format!(" {EOS_TAG} "));
            for piece in spaced.split_whitespace() {
                match piece {
                    EOL_TAG => f(ScanItem::Eol),
                    EOS_TAG => f(ScanItem::Eos),
                    word => {
                        let trimmed = word.trim_matches(|c: char| !c.is_alphanumeric());
                        if !trimmed.is_empty() {
                            f(ScanItem::Piece(trimmed));
                        }
                    }
                }
            }
        }
    }
}

impl Vocabulary {
    /// Build from training documents. Char mode keeps every piece seen at
    /// least `min_count` times; word mode keeps the `top_k` most frequent
    /// words. Ordering is by descending count, ties lexicographic.
    pub fn build(
        train: &[Document],
        granularity: Granularity,
        opts: VocabOptions,
    ) -> Result<Self, NlmError> {
        let mut counts: HashMap<String, u64> = HashMap::new();
        for doc in train {
            scan_events(&doc.text, granularity, |item| {
                if let ScanItem::Piece(p) = item {
                    if let Some(c) = counts.get_mut(p) {
                        *c += 1;
                    } else {
                        counts.insert(p.to_string(), 1);
                    }
                }
            });
        }
        if counts.is_empty() {
            return Err(NlmError::EmptyTraining);
        }
        let mut ordered: Vec<(String, u64)> = counts.into_iter().collect();
        ordered.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let kept: Vec<String> = match granularity {
            Granularity::Char => ordered
                .into_iter()
                .filter(|(_, c)| *c >= opts.min_count)
                .map(|(t, _)| t)
                .collect(),
            Granularity::Word => ordered
                .into_iter()
                .take(opts.top_k)
                .map(|(t, _)| t)
                .collect(),
        };
        Ok(Self::from_regular_tokens(granularity, kept))
    }

    /// Reassemble from a full id-ordered token list (checkpoint loading).
    pub fn from_token_list(
        granularity: Granularity,
        tokens: Vec<String>,
    ) -> Result<Self, NlmError> {
        if tokens.len() < NUM_SPECIALS
            || tokens[..NUM_SPECIALS]
                .iter()
                .zip(SPECIAL_TOKENS)
                .any(|(a, b)| a != b)
        {
            return Err(NlmError::BadCheckpoint(
                "vocabulary does not start with the special tokens".into(),
            ));
        }
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Ok(Vocabulary {
            granularity,
            tokens,
            index,
        })
    }

    fn from_regular_tokens(granularity: Granularity, regular: Vec<String>) -> Self {
        let mut tokens: Vec<String> = SPECIAL_TOKENS.iter().map(|s| s.to_string()).collect();
        tokens.extend(regular);
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Vocabulary {
            granularity,
            tokens,
            index,
        }
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty() // never: the specials are always present
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn id_of(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token_of(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    /// Encode raw document text: markup tags map to their special ids,
    /// whitespace runs to the whitespace id (char mode), unknown pieces to
    /// the unknown id.
    pub fn encode_text(&self, text: &str) -> Vec<u32> {
        let mut ids = Vec::new();
        scan_events(text, self.granularity, |item| match item {
            ScanItem::Eol => ids.push(EOL_ID),
            ScanItem::Eos => ids.push(EOS_ID),
            ScanItem::Whitespace => ids.push(WHITESPACE_ID),
            ScanItem::Piece(p) => ids.push(self.id_of(p).unwrap_or(UNKNOWN_ID)),
        });
        ids
    }

    /// Count of encoded tokens that mapped to the unknown id.
    pub fn unknown_count(&self, ids: &[u32]) -> usize {
        ids.iter().filter(|&&id| id == UNKNOWN_ID).count()
    }
}

/// Author/family lookup tables for conditioning; id 0 is the reserved
/// unknown row in each table. Kind ids are fixed: unknown 0, poetry 1,
/// prose 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondTables {
    pub authors: Vec<String>,
    pub families: Vec<String>,
}

pub const KIND_ROWS: usize = 3;

impl CondTables {
    pub fn from_documents(docs: &[Document]) -> Self {
        let mut authors: Vec<String> = docs.iter().map(|d| d.author.clone()).collect();
        authors.sort();
        authors.dedup();
        let mut families: Vec<String> = docs.iter().map(|d| d.family.clone()).collect();
        families.sort();
        families.dedup();
        CondTables { authors, families }
    }

    pub fn author_rows(&self) -> usize {
        self.authors.len() + 1
    }

    pub fn family_rows(&self) -> usize {
        self.families.len() + 1
    }

    /// 0 when the author was not seen at training time.
    pub fn author_id(&self, author: &str) -> u32 {
        self.authors
            .binary_search_by(|a| a.as_str().cmp(author))
            .map(|i| i as u32 + 1)
            .unwrap_or(0)
    }

    pub fn family_id(&self, family: &str) -> u32 {
        self.families
            .binary_search_by(|f| f.as_str().cmp(family))
            .map(|i| i as u32 + 1)
            .unwrap_or(0)
    }

    pub fn kind_id(kind: Kind) -> u32 {
        match kind {
            Kind::Poetry => 1,
            Kind::Prose => 2,
        }
    }

    pub fn resolve(&self, doc: &Document) -> ConditioningIds {
        ConditioningIds {
            author: self.author_id(&doc.author),
            family: self.family_id(&doc.family),
            kind: Self::kind_id(doc.kind),
        }
    }
}

/// Embedding-table indices for one document's metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConditioningIds {
    pub author: u32,
    pub family: u32,
    pub kind: u32,
}

/// One training unit: up to max-length input ids, the per-position targets
/// (the next token, the following segment's first token, or the boundary
/// id at the end of the document) and the document's conditioning.
#[derive(Debug, Clone)]
pub struct TrainSegment {
    pub inputs: Vec<u32>,
    pub targets: Vec<u32>,
    pub cond: ConditioningIds,
}

/// Cut a document into consecutive non-overlapping segments of at most
/// `max_len` tokens. Each position's target is the next token in the
/// document; the final position of the last segment targets the boundary.
pub fn encode_document(
    doc: &Document,
    vocab: &Vocabulary,
    tables: &CondTables,
    max_len: usize,
) -> Vec<TrainSegment> {
    let ids = vocab.encode_text(&doc.text);
    let cond = tables.resolve(doc);
    segment_ids(&ids, cond, max_len)
}

pub(crate) fn segment_ids(
    ids: &[u32],
    cond: ConditioningIds,
    max_len: usize,
) -> Vec<TrainSegment> {
    assert!(max_len >= 2, "max sequence length must be at least 2");
    let mut segments = Vec::new();
    let n = ids.len();
    let mut start = 0;
    while start < n {
        let end = (start + max_len).min(n);
        let inputs = ids[start..end].to_vec();
        let mut targets = ids[start + 1..end].to_vec();
        targets.push(if end < n { ids[end] } else { BOUNDARY_ID });
        segments.push(TrainSegment {
            inputs,
            targets,
            cond,
        });
        start = end;
    }
    segments
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(kind: Kind, text: &str) -> Document {
        Document {
            author: "Autore Uno".into(),
            title: "t".into(),
            collection: "c".into(),
            family: "Laude".into(),
            kind,
            text: text.into(),
        }
    }

    #[test]
    fn char_vocab_has_pieces_plus_specials() {
        let d = doc(Kind::Poetry, "ab<EOL>ba");
        let vocab =
            Vocabulary::build(&[d], Granularity::Char, VocabOptions::default()).unwrap();
        assert_eq!(vocab.len(), 2 + NUM_SPECIALS);
        assert!(vocab.id_of("a").is_some());
        assert!(vocab.id_of("b").is_some());
    }

    #[test]
    fn word_vocab_top_k() {
        let d = doc(
            Kind::Prose,
            "uno due tre quattro cinque uno due tre uno due uno<EOS>",
        );
        let vocab = Vocabulary::build(
            &[d.clone()],
            Granularity::Word,
            VocabOptions {
                min_count: 1,
                top_k: 3,
            },
        )
        .unwrap();
        assert_eq!(vocab.len(), 3 + NUM_SPECIALS);
        assert!(vocab.id_of("uno").is_some());
        assert!(vocab.id_of("due").is_some());
        assert!(vocab.id_of("tre").is_some());
        assert!(vocab.id_of("quattro").is_none());
        let ids = vocab.encode_text(&d.text);
        assert_eq!(vocab.unknown_count(&ids), 2); // quattro, cinque
    }

    #[test]
    fn empty_text_is_an_error() {
        let d = doc(Kind::Prose, " <EOS> ");
        assert!(Vocabulary::build(&[d], Granularity::Char, VocabOptions::default()).is_err());
    }

    #[test]
    fn deterministic_ordering_breaks_ties_lexicographically() {
        let d = doc(Kind::Prose, "ba ab");
        let v1 =
            Vocabulary::build(&[d.clone()], Granularity::Char, VocabOptions::default()).unwrap();
        let v2 = Vocabulary::build(&[d], Granularity::Char, VocabOptions::default()).unwrap();
        assert_eq!(v1.tokens(), v2.tokens());
        // equal counts for a and b: lexicographic
        assert!(v1.id_of("a").unwrap() < v1.id_of("b").unwrap());
    }

    #[test]
    fn encode_maps_tags_and_whitespace() {
        let d = doc(Kind::Poetry, "ama<EOL>core");
        let vocab =
            Vocabulary::build(&[d.clone()], Granularity::Char, VocabOptions::default()).unwrap();
        let ids = vocab.encode_text("ama<EOL>core");
        let expect: Vec<u32> = vec![
            vocab.id_of("a").unwrap(),
            vocab.id_of("m").unwrap(),
            vocab.id_of("a").unwrap(),
            EOL_ID,
            vocab.id_of("c").unwrap(),
            vocab.id_of("o").unwrap(),
            vocab.id_of("r").unwrap(),
            vocab.id_of("e").unwrap(),
        ];
        assert_eq!(ids, expect);
        let ws = vocab.encode_text("a m");
        assert_eq!(
            ws,
            vec![vocab.id_of("a").unwrap(), WHITESPACE_ID, vocab.id_of("m").unwrap()]
        );
    }

    #[test]
    fn unknown_chars_map_to_unknown() {
        let d = doc(Kind::Poetry, "aaa<EOL>");
        let vocab =
            Vocabulary::build(&[d], Granularity::Char, VocabOptions::default()).unwrap();
        let ids = vocab.encode_text("axa");
        assert_eq!(ids[1], UNKNOWN_ID);
        assert_eq!(vocab.unknown_count(&ids), 1);
    }

    #[test]
    fn segments_split_at_max_length() {
        let ids: Vec<u32> = (0..120).map(|i| 5 + (i % 7) as u32).collect();
        let cond = ConditioningIds {
            author: 1,
            family: 1,
            kind: 1,
        };
        let segs = segment_ids(&ids, cond, 50);
        assert_eq!(
            segs.iter().map(|s| s.inputs.len()).collect::<Vec<_>>(),
            vec![50, 50, 20]
        );
        // cross-segment successor targets
        assert_eq!(segs[0].targets[49], ids[50]);
        assert_eq!(segs[1].targets[49], ids[100]);
        assert_eq!(*segs[2].targets.last().unwrap(), BOUNDARY_ID);
        // within-segment shift
        assert_eq!(segs[0].targets[..49], ids[1..50]);
        // every segment predicts exactly as many tokens as it consumes
        let total: usize = segs.iter().map(|s| s.targets.len()).sum();
        assert_eq!(total, ids.len());
    }

    #[test]
    fn cond_tables_reserve_unknown_row() {
        let docs = vec![doc(Kind::Poetry, "a<EOL>"), doc(Kind::Prose, "b")];
        let tables = CondTables::from_documents(&docs);
        assert_eq!(tables.author_id("Autore Uno"), 1);
        assert_eq!(tables.author_id("never seen"), 0);
        assert_eq!(tables.family_id("Laude"), 1);
        assert_eq!(tables.family_id("never seen"), 0);
        assert_eq!(CondTables::kind_id(Kind::Poetry), 1);
        assert_eq!(CondTables::kind_id(Kind::Prose), 2);
    }
}
