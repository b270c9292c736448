//! Perplexity-based distances between corpus groups.
//!
//! For a pair of varieties L1, L2 with models trained on each side,
//! pp_{L1→L2} is the perplexity of L1's model on the whole of L2. The
//! distance PLD is the mean of the two directed values; the ratio PLR is
//! their quotient. PLR above 1 suggests L1 is the more various language.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{split_train_heldout, CorpusGroup, Document, SplitSpec};
use crate::lm::{perplexity_from_nll, LmError};
use crate::ngram::NgramModel;
use crate::nlm::{
    self, BOUNDARY_ID, CondTables, TrainConfig, TrainedModel,
    Vocabulary, VocabOptions,
};

#[derive(Debug, Error)]
pub enum VarietyError {
    #[error("need at least 2 nonempty groups, got {0}")]
    TooFewGroups(usize),
    #[error("group '{group}': {source}")]
    GroupTraining {
        group: String,
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error("evaluation failed: {0}")]
    Evaluation(Box<dyn std::error::Error + Send + Sync>),
    #[error("non-finite perplexity input")]
    NonFinite,
    #[error("perplexity ratio needs a positive denominator")]
    ZeroDenominator,
    #[error(transparent)]
    Lm(#[from] LmError),
}

/// Perplexity of the model trained on `source`, evaluated on `target`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectedPerplexity {
    pub source: String,
    pub target: String,
    pub value: f64,
}

/// The two directed perplexities of a pair plus the derived metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceReport {
    pub pp_12: DirectedPerplexity,
    pub pp_21: DirectedPerplexity,
    pub pld: f64,
    pub plr: f64,
}

/// Perplexity-based Language Distance: the mean of the two directed values.
pub fn pld(pp_12: f64, pp_21: f64) -> Result<f64, VarietyError> {
    if !pp_12.is_finite() || !pp_21.is_finite() {
        return Err(VarietyError::NonFinite);
    }
    Ok((pp_12 + pp_21) / 2.0)
}

/// Perplexity-based Language Ratio: pp_12 / pp_21.
pub fn plr(pp_12: f64, pp_21: f64) -> Result<f64, VarietyError> {
    if !pp_12.is_finite() || !pp_21.is_finite() {
        return Err(VarietyError::NonFinite);
    }
    if pp_21 <= 0.0 {
        return Err(VarietyError::ZeroDenominator);
    }
    Ok(pp_12 / pp_21)
}

/// Which language-model backend drives the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Ngram,
    Nlm,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Ngram => "ngram",
            Backend::Nlm => "nlm",
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct NgramConfig {
    pub order: usize,
    pub alpha: f64,
}

impl Default for NgramConfig {
    fn default() -> Self {
        NgramConfig {
            order: 7,
            alpha: 0.1,
        }
    }
}

/// Full configuration of a distance-matrix run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DistanceConfig {
    pub backend: Backend,
    pub train_fraction: f64,
    /// Master seed; per-group seeds are derived from it and from the group
    /// contents, so identical groups train identically.
    pub seed: u64,
    pub ngram: NgramConfig,
    pub nlm: TrainConfig,
    /// Worker threads for the per-group trainings (0 = sequential).
    pub jobs: usize,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        DistanceConfig {
            backend: Backend::Ngram,
            train_fraction: 0.9,
            seed: 42,
            ngram: NgramConfig::default(),
            nlm: TrainConfig::default(),
            jobs: 0,
        }
    }
}

/// PLD and PLR over every pair of groups, plus the raw directed values.
/// Rows index the model's training corpus L1, columns the evaluation
/// corpus; the PLD matrix is symmetric by construction and the PLR
/// diagonal is exactly 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarietyMatrix {
    pub groups: Vec<String>,
    pub directed: Vec<Vec<f64>>,
    pub pld: Vec<Vec<f64>>,
    pub plr: Vec<Vec<f64>>,
    pub backend: Backend,
    pub config: DistanceConfig,
}

impl VarietyMatrix {
    pub fn report_pairs(&self) -> Vec<DistanceReport> {
        let mut out = Vec::new();
        for i in 0..self.groups.len() {
            for j in (i + 1)..self.groups.len() {
                out.push(DistanceReport {
                    pp_12: DirectedPerplexity {
                        source: self.groups[i].clone(),
                        target: self.groups[j].clone(),
                        value: self.directed[i][j],
                    },
                    pp_21: DirectedPerplexity {
                        source: self.groups[j].clone(),
                        target: self.groups[i].clone(),
                        value: self.directed[j][i],
                    },
                    pld: self.pld[i][j],
                    plr: self.plr[i][j],
                });
            }
        }
        out
    }

    /// CSV with the group names as header row and first column.
    pub fn matrix_csv(groups: &[String], matrix: &[Vec<f64>]) -> String {
        let mut out = String::from("group");
        for g in groups {
            out.push(',');
            out.push_str(g);
        }
        out.push('\n');
        for (i, row) in matrix.iter().enumerate() {
            out.push_str(&groups[i]);
            for v in row {
                out.push_str(&format!(",{v:.4}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Stable content hash so per-group seeds depend on the data, not on the
/// group's position: identical copies of a group get identical seeds and
/// therefore identical splits and models.
fn group_seed(master: u64, group: &CorpusGroup) -> u64 {
    let mut hash = 0xcbf29ce484222325u64; // FNV-1a
    for doc in &group.documents {
        for part in [&doc.author, &doc.title, &doc.text] {
            for b in part.as_bytes() {
                hash ^= *b as u64;
                hash = hash.wrapping_mul(0x100000001b3);
            }
        }
    }
    master ^ hash
}

/// A trained per-group model of either backend.
pub enum GroupModel {
    Ngram {
        model: NgramModel,
        vocab: Vocabulary,
        tables: CondTables,
    },
    Nlm(TrainedModel),
}

impl GroupModel {
    pub fn from_checkpoint(ckpt: crate::nlm::Checkpoint) -> Self {
        match ckpt {
            crate::nlm::Checkpoint::Nlm(trained) => GroupModel::Nlm(trained),
            crate::nlm::Checkpoint::Ngram {
                model,
                vocab,
                tables,
            } => GroupModel::Ngram {
                model,
                vocab,
                tables,
            },
        }
    }

    pub fn perplexity_on(&self, docs: &[Document], nlm_cfg: &TrainConfig) -> Result<f64, VarietyError> {
        match self {
            GroupModel::Ngram { model, vocab, .. } => {
                let mut nll = 0.0;
                let mut tokens = 0usize;
                for doc in docs {
                    let ids = vocab.encode_text(&doc.text);
                    if ids.is_empty() {
                        continue;
                    }
                    nll -= model.log_prob(&ids)?;
                    tokens += ids.len();
                }
                Ok(perplexity_from_nll(nll, tokens)?)
            }
            GroupModel::Nlm(trained) => nlm::perplexity_on(
                &trained.params,
                &trained.vocab,
                &trained.tables,
                docs,
                nlm_cfg.max_seq_len,
            )
            .map_err(|e| VarietyError::Evaluation(Box::new(e))),
        }
    }
}

/// Train one group's model with the configured backend: its own
/// vocabulary, its own train/heldout split seeded from the group contents.
pub fn train_group_model(
    group: &CorpusGroup,
    config: &DistanceConfig,
) -> Result<GroupModel, VarietyError> {
    let seed = group_seed(config.seed, group);
    let split = SplitSpec {
        train_fraction: config.train_fraction,
        seed,
    };
    let (train_docs, heldout_docs) =
        split_train_heldout(group, &split).map_err(|e| VarietyError::GroupTraining {
            group: group.name.clone(),
            source: Box::new(e),
        })?;
    match config.backend {
        Backend::Ngram => {
            let granularity = config.nlm.granularity;
            let vocab = Vocabulary::build(&train_docs, granularity, VocabOptions::default())
                .map_err(|e| VarietyError::GroupTraining {
                    group: group.name.clone(),
                    source: Box::new(e),
                })?;
            let tables = CondTables::from_documents(&train_docs);
            let sequences: Vec<Vec<u32>> = train_docs
                .iter()
                .map(|d| vocab.encode_text(&d.text))
                .filter(|ids| !ids.is_empty())
                .collect();
            let model = NgramModel::fit(
                &sequences,
                config.ngram.order,
                config.ngram.alpha,
                vocab.len(),
                BOUNDARY_ID,
            )
            .map_err(|e| VarietyError::GroupTraining {
                group: group.name.clone(),
                source: Box::new(e),
            })?;
            Ok(GroupModel::Ngram {
                model,
                vocab,
                tables,
            })
        }
        Backend::Nlm => {
            let mut cfg = config.nlm.clone();
            cfg.seed = seed;
            let trained =
                nlm::train(&train_docs, &heldout_docs, &cfg).map_err(|e| {
                    VarietyError::GroupTraining {
                        group: group.name.clone(),
                        source: Box::new(e),
                    }
                })?;
            Ok(GroupModel::Nlm(trained))
        }
    }
}

/// Train one model per group and evaluate every model on every group in
/// full. The diagonal holds each model's perplexity on its own complete
/// corpus; PLD mirrors the off-diagonal means exactly and the PLR diagonal
/// is exactly 1.
pub fn variety_matrix(
    groups: &[CorpusGroup],
    config: &DistanceConfig,
) -> Result<VarietyMatrix, VarietyError> {
    let nonempty: Vec<&CorpusGroup> = groups.iter().filter(|g| !g.documents.is_empty()).collect();
    if nonempty.len() < 2 {
        return Err(VarietyError::TooFewGroups(nonempty.len()));
    }
    let k = nonempty.len();

    let models: Vec<Result<GroupModel, VarietyError>> = if config.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .expect("thread pool");
        pool.install(|| {
            nonempty
                .par_iter()
                .map(|g| train_group_model(g, config))
                .collect()
        })
    } else {
        nonempty
            .iter()
            .map(|g| train_group_model(g, config))
            .collect()
    };
    let mut trained = Vec::with_capacity(k);
    for m in models {
        trained.push(m?);
    }

    let mut directed = vec![vec![0.0f64; k]; k];
    for (i, model) in trained.iter().enumerate() {
        for (j, group) in nonempty.iter().enumerate() {
            directed[i][j] = model.perplexity_on(&group.documents, &config.nlm)?;
        }
    }

    let mut pld_m = vec![vec![0.0f64; k]; k];
    let mut plr_m = vec![vec![0.0f64; k]; k];
    for i in 0..k {
        pld_m[i][i] = directed[i][i];
        plr_m[i][i] = 1.0;
        for j in (i + 1)..k {
            let d = pld(directed[i][j], directed[j][i])?;
            pld_m[i][j] = d;
            pld_m[j][i] = d;
            plr_m[i][j] = plr(directed[i][j], directed[j][i])?;
            plr_m[j][i] = plr(directed[j][i], directed[i][j])?;
        }
    }

    Ok(VarietyMatrix {
        groups: nonempty.iter().map(|g| g.name.clone()).collect(),
        directed,
        pld: pld_m,
        plr: plr_m,
        backend: config.backend,
        config: config.clone(),
    })
}
