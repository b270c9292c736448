//! Conditional neural language model: tied-embedding recurrent LM over
//! characters or words, conditioned on author, family and composition kind,
//! trained with early stopping on a heldout split.

mod checkpoint;
mod gradcheck;
mod model;
mod train;
mod vocab;

pub use checkpoint::{load as load_checkpoint, save_ngram, save_nlm, BackendKind, Checkpoint};
pub use gradcheck::{grad_check, gradient_pairs, GradCheckConfig};
pub use model::{ModelDims, ModelParams, NlmParams, SegmentTape, SLOT_NAMES};
pub use train::{
    extract_states, perplexity_on, train, DocState, EvalRecord, TrainConfig, TrainLog,
    TrainedModel,
};
pub use vocab::{
    encode_document, CondTables, ConditioningIds, Granularity, TrainSegment, Vocabulary,
    VocabOptions, BOUNDARY_ID, EOL_ID, EOS_ID, NUM_SPECIALS, UNKNOWN_ID, WHITESPACE_ID,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NlmError {
    #[error("training documents contain no tokens")]
    EmptyTraining,
    #[error("both train and heldout splits must be nonempty")]
    EmptySplit,
    #[error("no documents to evaluate")]
    EmptyEvalDocs,
    #[error("non-finite training loss at step {step}")]
    NonFiniteLoss { step: u64 },
    #[error("invalid training config: {0}")]
    BadConfig(String),
    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),
    #[error(transparent)]
    Tensor(#[from] crate::tensorcore::TensorError),
    #[error(transparent)]
    Lm(#[from] crate::lm::LmError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
