//! Character n-gram language model with additive smoothing: the fast
//! baseline backend for variety distances and the oracle partner for the
//! neural model's perplexity tests.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use thiserror::Error;

use crate::lm::{LanguageModel, LmError};

const MAGIC: &[u8; 4] = b"VNGM";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum NgramIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad n-gram dump: {0}")]
    BadFormat(String),
}

#[derive(Debug, Clone, Default)]
struct ContextCounts {
    total: u64,
    counts: HashMap<u32, u64>,
}

/// Additive-smoothing n-gram model over token ids.
///
/// Sequences are padded at the start with `pad_id` so the first tokens have
/// full contexts; the pad token is context only and is never predicted.
#[derive(Debug, Clone)]
pub struct NgramModel {
    order: usize,
    alpha: f64,
    vocab_size: usize,
    pad_id: u32,
    contexts: HashMap<Box<[u32]>, ContextCounts>,
}

impl NgramModel {
    /// An empty model: every conditional is the α-uniform distribution.
    pub fn new(order: usize, alpha: f64, vocab_size: usize, pad_id: u32) -> Self {
        assert!(order >= 1, "order must be at least 1");
        assert!(alpha > 0.0, "alpha must be positive");
        assert!(vocab_size >= 1, "vocabulary must be nonempty");
        NgramModel {
            order,
            alpha,
            vocab_size,
            pad_id,
            contexts: HashMap::new(),
        }
    }

    /// Count the training sequences into a fresh model.
    pub fn fit(
        train: &[Vec<u32>],
        order: usize,
        alpha: f64,
        vocab_size: usize,
        pad_id: u32,
    ) -> Result<Self, LmError> {
        if train.iter().all(|s| s.is_empty()) {
            return Err(LmError::EmptyTraining);
        }
        let mut model = NgramModel::new(order, alpha, vocab_size, pad_id);
        for seq in train {
            model.observe(seq)?;
        }
        Ok(model)
    }

    /// Add one sequence's counts.
    pub fn observe(&mut self, seq: &[u32]) -> Result<(), LmError> {
        for &id in seq {
            if id as usize >= self.vocab_size {
                return Err(LmError::OutOfVocabulary {
                    id,
                    vocab: self.vocab_size,
                });
            }
        }
        let mut ctx: Vec<u32> = vec![self.pad_id; self.order - 1];
        for &id in seq {
            let entry = self
                .contexts
                .entry(ctx.clone().into_boxed_slice())
                .or_default();
            entry.total += 1;
            *entry.counts.entry(id).or_insert(0) += 1;
            if self.order > 1 {
                ctx.rotate_left(1);
                ctx[self.order - 2] = id;
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn pad_id(&self) -> u32 {
        self.pad_id
    }

    /// Stored count for (context, token); zero when unseen.
    pub fn count(&self, ctx: &[u32], token: u32) -> u64 {
        self.contexts
            .get(ctx)
            .and_then(|c| c.counts.get(&token).copied())
            .unwrap_or(0)
    }

    /// Total count of a context; zero when unseen.
    pub fn context_total(&self, ctx: &[u32]) -> u64 {
        self.contexts.get(ctx).map(|c| c.total).unwrap_or(0)
    }

    /// Sum of all stored counts: one per predicted training token.
    pub fn total_observations(&self) -> u64 {
        self.contexts.values().map(|c| c.total).sum()
    }

    /// Smoothed conditional probability
    /// p(token | ctx) = (count + α) / (total + α·|V|).
    /// Unseen contexts therefore fall back to the α-uniform 1/|V|.
    pub fn prob(&self, ctx: &[u32], token: u32) -> f64 {
        let c = self.count(ctx, token) as f64;
        let total = self.context_total(ctx) as f64;
        (c + self.alpha) / (total + self.alpha * self.vocab_size as f64)
    }

    /// Natural-log likelihood of a sequence; every token is predicted once.
    pub fn log_prob(&self, seq: &[u32]) -> Result<f64, LmError> {
        let mut ctx: Vec<u32> = vec![self.pad_id; self.order - 1];
        let mut logp = 0.0f64;
        for &id in seq {
            if id as usize >= self.vocab_size {
                return Err(LmError::OutOfVocabulary {
                    id,
                    vocab: self.vocab_size,
                });
            }
            logp += self.prob(&ctx, id).ln();
            if self.order > 1 {
                ctx.rotate_left(1);
                ctx[self.order - 2] = id;
            }
        }
        Ok(logp)
    }

    /// Serialize to the versioned binary table: magic, version, n, α, |V|,
    /// pad id, then contexts sorted lexicographically, each with its sorted
    /// (token, count) entries.
    pub fn dump<W: Write>(&self, mut w: W) -> Result<(), NgramIoError> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.order as u32).to_le_bytes())?;
        w.write_all(&self.alpha.to_le_bytes())?;
        w.write_all(&(self.vocab_size as u32).to_le_bytes())?;
        w.write_all(&self.pad_id.to_le_bytes())?;
        let sorted: BTreeMap<&Box<[u32]>, &ContextCounts> = self.contexts.iter().collect();
        w.write_all(&(sorted.len() as u64).to_le_bytes())?;
        for (ctx, counts) in sorted {
            for id in ctx.iter() {
                w.write_all(&id.to_le_bytes())?;
            }
            let entries: BTreeMap<u32, u64> =
                counts.counts.iter().map(|(&k, &v)| (k, v)).collect();
            w.write_all(&(entries.len() as u32).to_le_bytes())?;
            for (token, count) in entries {
                w.write_all(&token.to_le_bytes())?;
                w.write_all(&count.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn load<R: Read>(mut r: R) -> Result<Self, NgramIoError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(NgramIoError::BadFormat("wrong magic".into()));
        }
        let version = read_u32(&mut r)?;
        if version != FORMAT_VERSION {
            return Err(NgramIoError::BadFormat(format!(
                "unsupported version {version}"
            )));
        }
        let order = read_u32(&mut r)? as usize;
        let alpha = read_f64(&mut r)?;
        let vocab_size = read_u32(&mut r)? as usize;
        let pad_id = read_u32(&mut r)?;
        if order < 1 || vocab_size < 1 || !(alpha > 0.0) {
            return Err(NgramIoError::BadFormat("invalid header fields".into()));
        }
        let n_contexts = read_u64(&mut r)?;
        let mut contexts = HashMap::with_capacity(n_contexts as usize);
        for _ in 0..n_contexts {
            let mut ctx = vec![0u32; order - 1];
            for slot in &mut ctx {
                *slot = read_u32(&mut r)?;
            }
            let n_entries = read_u32(&mut r)?;
            let mut counts = HashMap::with_capacity(n_entries as usize);
            let mut total = 0u64;
            for _ in 0..n_entries {
                let token = read_u32(&mut r)?;
                let count = read_u64(&mut r)?;
                total += count;
                counts.insert(token, count);
            }
            if counts.values().any(|&c| c == 0) {
                return Err(NgramIoError::BadFormat("zero count entry".into()));
            }
            contexts.insert(ctx.into_boxed_slice(), ContextCounts { total, counts });
        }
        Ok(NgramModel {
            order,
            alpha,
            vocab_size,
            pad_id,
            contexts,
        })
    }
}

impl LanguageModel for NgramModel {
    fn sequence_log_prob(&self, seq: &[u32]) -> Result<(f64, usize), LmError> {
        Ok((self.log_prob(seq)?, seq.len()))
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, NgramIoError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, NgramIoError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64, NgramIoError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}
