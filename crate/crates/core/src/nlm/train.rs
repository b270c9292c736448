//! Training with Adam, gradient clipping and heldout early stopping, plus
//! model-level perplexity evaluation and hidden-state extraction.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Kind};
use crate::lm::perplexity_from_nll;
use crate::nlm::model::{ModelDims, ModelParams, NlmParams};
use crate::nlm::vocab::{
    encode_document, CondTables, Granularity, TrainSegment, Vocabulary, VocabOptions,
};
use crate::nlm::NlmError;
use crate::tensorcore::{clip_global_norm, AdamConfig, AdamState};

fn default_max_seq_len() -> usize {
    50
}
fn default_batch_size() -> usize {
    16
}
fn default_max_epochs() -> usize {
    30
}
fn default_patience() -> usize {
    5
}
fn default_eval_interval() -> usize {
    50
}
fn default_seed() -> u64 {
    42
}
fn default_clip_norm() -> f64 {
    5.0
}
fn default_metadata_dropout() -> f64 {
    0.1
}
fn default_hidden() -> usize {
    256
}
fn default_d_author() -> usize {
    16
}
fn default_d_family() -> usize {
    16
}
fn default_d_kind() -> usize {
    32
}
fn default_granularity() -> Granularity {
    Granularity::Char
}
fn default_vocab_options() -> VocabOptions {
    VocabOptions::default()
}

/// Everything that shapes a training run. All fields have documented
/// defaults and every random choice flows from `seed`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub granularity: Granularity,
    /// Segment length cap.
    pub max_seq_len: usize,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Heldout evaluations without improvement before stopping.
    pub patience: usize,
    /// Optimizer steps between heldout evaluations.
    pub eval_interval: usize,
    pub seed: u64,
    pub adam: AdamConfig,
    pub clip_norm: f64,
    /// Probability that a segment's author (and, independently, family) id
    /// is replaced by the unknown id during training.
    pub metadata_dropout: f64,
    /// Token-embedding size; defaults to 64 in char mode, 128 in word mode.
    pub embed_dim: Option<usize>,
    pub hidden: usize,
    pub d_author: usize,
    pub d_family: usize,
    pub d_kind: usize,
    pub vocab: VocabOptions,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            granularity: default_granularity(),
            max_seq_len: default_max_seq_len(),
            batch_size: default_batch_size(),
            max_epochs: default_max_epochs(),
            patience: default_patience(),
            eval_interval: default_eval_interval(),
            seed: default_seed(),
            adam: AdamConfig::default(),
            clip_norm: default_clip_norm(),
            metadata_dropout: default_metadata_dropout(),
            embed_dim: None,
            hidden: default_hidden(),
            d_author: default_d_author(),
            d_family: default_d_family(),
            d_kind: default_d_kind(),
            vocab: default_vocab_options(),
        }
    }
}

impl TrainConfig {
    pub fn embed_dim(&self) -> usize {
        self.embed_dim.unwrap_or(match self.granularity {
            Granularity::Char => 64,
            Granularity::Word => 128,
        })
    }

    pub fn validate(&self) -> Result<(), NlmError> {
        if self.max_seq_len < 2 {
            return Err(NlmError::BadConfig("max_seq_len must be >= 2".into()));
        }
        if self.patience < 1 {
            return Err(NlmError::BadConfig("patience must be >= 1".into()));
        }
        if self.batch_size < 1 {
            return Err(NlmError::BadConfig("batch_size must be >= 1".into()));
        }
        if self.eval_interval < 1 {
            return Err(NlmError::BadConfig("eval_interval must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.metadata_dropout) {
            return Err(NlmError::BadConfig(
                "metadata_dropout must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// A small-model configuration for quick experiments and tests. The
    /// higher learning rate suits the reduced parameter count.
    pub fn small(seed: u64) -> Self {
        TrainConfig {
            hidden: 32,
            embed_dim: Some(16),
            d_author: 4,
            d_family: 4,
            d_kind: 4,
            batch_size: 8,
            eval_interval: 25,
            max_epochs: 40,
            patience: 4,
            adam: AdamConfig {
                learning_rate: 1e-2,
                ..AdamConfig::default()
            },
            seed,
            ..TrainConfig::default()
        }
    }
}

/// One heldout evaluation. `train_loss` is the mean per-token NLL since the
/// previous evaluation (absent on the pre-training record).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRecord {
    pub step: u64,
    pub train_loss: Option<f64>,
    pub heldout_ppl: f64,
    pub best_so_far: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrainLog {
    pub records: Vec<EvalRecord>,
    pub stopped_early: bool,
    pub epochs_run: usize,
}

impl TrainLog {
    /// Line-delimited JSON, one record per evaluation.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn best(&self) -> Option<f64> {
        self.records
            .iter()
            .map(|r| r.heldout_ppl)
            .fold(None, |acc, v| {
                Some(match acc {
                    None => v,
                    Some(a) if v < a => v,
                    Some(a) => a,
                })
            })
    }
}

/// A trained model with everything needed to score new text.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub params: ModelParams,
    pub vocab: Vocabulary,
    pub tables: CondTables,
    pub config: TrainConfig,
    pub log: TrainLog,
}

fn heldout_perplexity(
    params: &ModelParams,
    segments: &[TrainSegment],
) -> Result<f64, NlmError> {
    let mut nll = 0.0;
    let mut count = 0usize;
    for seg in segments {
        let (n, c) = params.segment_nll(&seg.inputs, &seg.targets, seg.cond)?;
        nll += n;
        count += c;
    }
    Ok(perplexity_from_nll(nll, count)?)
}

/// Train a conditional model on the train split, early-stopping on the
/// heldout split, and return the parameters from the best evaluation.
pub fn train(
    train_docs: &[Document],
    heldout_docs: &[Document],
    config: &TrainConfig,
) -> Result<TrainedModel, NlmError> {
    config.validate()?;
    if train_docs.is_empty() || heldout_docs.is_empty() {
        return Err(NlmError::EmptySplit);
    }
    let vocab = Vocabulary::build(train_docs, config.granularity, config.vocab)?;
    let tables = CondTables::from_documents(train_docs);
    let dims = ModelDims {
        vocab: vocab.len(),
        embed: config.embed_dim(),
        hidden: config.hidden,
        d_author: config.d_author,
        d_family: config.d_family,
        d_kind: config.d_kind,
        author_rows: tables.author_rows(),
        family_rows: tables.family_rows(),
    };

    let mut train_segments: Vec<TrainSegment> = Vec::new();
    for doc in train_docs {
        train_segments.extend(encode_document(doc, &vocab, &tables, config.max_seq_len));
    }
    let mut heldout_segments: Vec<TrainSegment> = Vec::new();
    for doc in heldout_docs {
        heldout_segments.extend(encode_document(doc, &vocab, &tables, config.max_seq_len));
    }
    if train_segments.is_empty() || heldout_segments.is_empty() {
        return Err(NlmError::EmptySplit);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = ModelParams::init(dims, &mut rng);
    let mut grads = NlmParams::<f32>::zeros(dims);
    let mut adam = AdamState::<f32>::new(config.adam);

    let mut log = TrainLog::default();
    let initial_ppl = heldout_perplexity(&params, &heldout_segments)?;
    let mut best_ppl = initial_ppl;
    let mut best_params = params.clone();
    log.records.push(EvalRecord {
        step: 0,
        train_loss: None,
        heldout_ppl: initial_ppl,
        best_so_far: best_ppl,
    });

    let mut step = 0u64;
    let mut evals_without_improvement = 0usize;
    let mut loss_since_eval = 0.0f64;
    let mut tokens_since_eval = 0usize;
    let mut stopped = false;

    'epochs: for epoch in 1..=config.max_epochs {
        log.epochs_run = epoch;
        let mut order: Vec<usize> = (0..train_segments.len()).collect();
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            for slot in grads.slots_mut() {
                slot.iter_mut().for_each(|v| *v = 0.0);
            }
            let batch_tokens: usize = batch
                .iter()
                .map(|&i| train_segments[i].targets.len())
                .sum();
            let scale = 1.0 / batch_tokens as f32;
            let mut batch_nll = 0.0f64;
            for &i in batch {
                let seg = &train_segments[i];
                let mut cond = seg.cond;
                // two draws per segment, unconditionally, so the stream
                // position does not depend on the metadata values
                let drop_author = rng.random_bool(config.metadata_dropout);
                let drop_family = rng.random_bool(config.metadata_dropout);
                if drop_author {
                    cond.author = 0;
                }
                if drop_family {
                    cond.family = 0;
                }
                let mut tape = params.forward_tape(&seg.inputs, cond)?;
                batch_nll += tape.nll(&seg.targets);
                tape.backward(&params, &seg.targets, &mut grads, scale)?;
            }
            if !batch_nll.is_finite() {
                return Err(NlmError::NonFiniteLoss { step });
            }
            loss_since_eval += batch_nll;
            tokens_since_eval += batch_tokens;
            {
                let mut slots = grads.slots_mut();
                clip_global_norm(&mut slots, config.clip_norm);
            }
            let mut param_slots = params.slots_mut();
            let grad_slots: Vec<&[f32]> =
                grads.slots().into_iter().map(|(_, s)| s).collect();
            adam.update(&mut param_slots, &grad_slots)?;
            drop(param_slots);
            step += 1;

            if step % config.eval_interval as u64 == 0 {
                let ppl = heldout_perplexity(&params, &heldout_segments)?;
                if ppl < best_ppl {
                    best_ppl = ppl;
                    best_params = params.clone();
                    evals_without_improvement = 0;
                } else {
                    evals_without_improvement += 1;
                }
                log.records.push(EvalRecord {
                    step,
                    train_loss: Some(loss_since_eval / tokens_since_eval.max(1) as f64),
                    heldout_ppl: ppl,
                    best_so_far: best_ppl,
                });
                loss_since_eval = 0.0;
                tokens_since_eval = 0;
                if evals_without_improvement >= config.patience {
                    stopped = true;
                    break 'epochs;
                }
            }
        }
    }

    if tokens_since_eval > 0 {
        let ppl = heldout_perplexity(&params, &heldout_segments)?;
        if ppl < best_ppl {
            best_ppl = ppl;
            best_params = params.clone();
        }
        log.records.push(EvalRecord {
            step,
            train_loss: Some(loss_since_eval / tokens_since_eval as f64),
            heldout_ppl: ppl,
            best_so_far: best_ppl,
        });
    }
    log.stopped_early = stopped;
    best_params.check_finite()?;

    Ok(TrainedModel {
        params: best_params,
        vocab,
        tables,
        config: config.clone(),
        log,
    })
}

/// Perplexity of a document set under a trained model. Documents are
/// encoded with the model's own vocabulary (unseen tokens become unknown)
/// and metadata absent from the training tables maps to the unknown rows.
pub fn perplexity_on(
    params: &ModelParams,
    vocab: &Vocabulary,
    tables: &CondTables,
    docs: &[Document],
    max_seq_len: usize,
) -> Result<f64, NlmError> {
    if docs.is_empty() {
        return Err(NlmError::EmptyEvalDocs);
    }
    let mut nll = 0.0;
    let mut count = 0usize;
    for doc in docs {
        for seg in encode_document(doc, vocab, tables, max_seq_len) {
            let (n, c) = params.segment_nll(&seg.inputs, &seg.targets, seg.cond)?;
            nll += n;
            count += c;
        }
    }
    Ok(perplexity_from_nll(nll, count)?)
}

/// Final hidden state of each document, with hidden state carried across
/// the document's full token sequence. Returns the states plus the number
/// of documents skipped because they encode to zero tokens.
pub struct DocState {
    pub state: Vec<f32>,
    pub author: String,
    pub family: String,
    pub title: String,
    pub kind: Kind,
}

pub fn extract_states(
    params: &ModelParams,
    vocab: &Vocabulary,
    tables: &CondTables,
    docs: &[Document],
) -> Result<(Vec<DocState>, usize), NlmError> {
    let mut states = Vec::with_capacity(docs.len());
    let mut skipped = 0usize;
    for doc in docs {
        let ids = vocab.encode_text(&doc.text);
        if ids.is_empty() {
            skipped += 1;
            continue;
        }
        let cond = tables.resolve(doc);
        let h = params.final_state(&ids, cond)?;
        states.push(DocState {
            state: h,
            author: doc.author.clone(),
            family: doc.family.clone(),
            title: doc.title.clone(),
            kind: doc.kind,
        });
    }
    Ok((states, skipped))
}
