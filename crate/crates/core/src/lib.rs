//! Toolkit for studying language varieties through statistical language models.
//!
//! The crate ingests line-delimited literary corpora annotated with author,
//! family and composition kind, computes corpus statistics, trains character
//! (or word) level language models from scratch, and measures distances
//! between varieties with perplexity-based metrics (PLD and PLR). Learned
//! document representations can be projected to 2-d with PCA or exact t-SNE
//! for inspection.

pub mod corpus;
pub mod fixtures;
pub mod lm;
pub mod ngram;
pub mod nlm;
pub mod projection;
pub mod tensorcore;
pub mod textstats;
pub mod variety;

pub(crate) mod svg;
