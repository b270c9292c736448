//! Checkpoint persistence.
//!
//! A neural checkpoint is a JSON manifest next to a flat little-endian f32
//! blob holding the parameters in slot order (E, lstm.wx, lstm.wh,
//! lstm.bias, W, b, authors, families, kinds). An n-gram checkpoint pairs
//! the same manifest shape with the binary count table.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ngram::NgramModel;
use crate::nlm::model::{ModelDims, NlmParams};
use crate::nlm::train::{TrainConfig, TrainedModel};
use crate::nlm::vocab::{CondTables, Granularity, Vocabulary};
use crate::nlm::NlmError;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Nlm,
    Ngram,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    backend: BackendKind,
    granularity: Granularity,
    vocab: Vec<String>,
    authors: Vec<String>,
    families: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dims: Option<ModelDims>,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<TrainConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ngram: Option<NgramMeta>,
    blob_file: String,
    blob_len_bytes: u64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NgramMeta {
    pub order: usize,
    pub alpha: f64,
}

/// A loaded checkpoint of either backend.
pub enum Checkpoint {
    Nlm(TrainedModel),
    Ngram {
        model: NgramModel,
        vocab: Vocabulary,
        tables: CondTables,
    },
}

fn blob_path(manifest_path: &Path, blob_file: &str) -> PathBuf {
    manifest_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(blob_file)
}

/// Write a trained neural model as `<stem>.json` + `<stem>.bin`.
pub fn save_nlm(model: &TrainedModel, manifest_path: &Path) -> Result<(), NlmError> {
    let stem = manifest_path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| NlmError::BadCheckpoint("manifest path has no stem".into()))?;
    let blob_file = format!("{stem}.bin");
    let mut blob: Vec<u8> = Vec::new();
    for (_, slot) in model.params.slots() {
        for v in slot {
            blob.extend_from_slice(&v.to_le_bytes());
        }
    }
    let manifest = Manifest {
        format_version: MANIFEST_VERSION,
        backend: BackendKind::Nlm,
        granularity: model.vocab.granularity(),
        vocab: model.vocab.tokens().to_vec(),
        authors: model.tables.authors.clone(),
        families: model.tables.families.clone(),
        dims: Some(model.params.dims),
        config: Some(model.config.clone()),
        ngram: None,
        blob_file: blob_file.clone(),
        blob_len_bytes: blob.len() as u64,
    };
    std::fs::write(
        manifest_path,
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    std::fs::write(blob_path(manifest_path, &blob_file), blob)?;
    Ok(())
}

/// Write an n-gram model (with its vocabulary and conditioning tables, so
/// evaluation can re-encode text) as `<stem>.json` + `<stem>.bin`.
pub fn save_ngram(
    model: &NgramModel,
    vocab: &Vocabulary,
    tables: &CondTables,
    manifest_path: &Path,
) -> Result<(), NlmError> {
    let stem = manifest_path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| NlmError::BadCheckpoint("manifest path has no stem".into()))?;
    let blob_file = format!("{stem}.bin");
    let mut blob: Vec<u8> = Vec::new();
    model
        .dump(&mut blob)
        .map_err(|e| NlmError::BadCheckpoint(e.to_string()))?;
    let manifest = Manifest {
        format_version: MANIFEST_VERSION,
        backend: BackendKind::Ngram,
        granularity: vocab.granularity(),
        vocab: vocab.tokens().to_vec(),
        authors: tables.authors.clone(),
        families: tables.families.clone(),
        dims: None,
        config: None,
        ngram: Some(NgramMeta {
            order: model.order(),
            alpha: model.alpha(),
        }),
        blob_file: blob_file.clone(),
        blob_len_bytes: blob.len() as u64,
    };
    std::fs::write(
        manifest_path,
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    std::fs::write(blob_path(manifest_path, &blob_file), blob)?;
    Ok(())
}

/// Load a checkpoint of either backend from its manifest path.
pub fn load(manifest_path: &Path) -> Result<Checkpoint, NlmError> {
    let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(manifest_path)?)
        .map_err(|e| NlmError::BadCheckpoint(format!("manifest: {e}")))?;
    if manifest.format_version != MANIFEST_VERSION {
        return Err(NlmError::BadCheckpoint(format!(
            "unsupported checkpoint version {}",
            manifest.format_version
        )));
    }
    let vocab = Vocabulary::from_token_list(manifest.granularity, manifest.vocab.clone())?;
    let tables = CondTables {
        authors: manifest.authors.clone(),
        families: manifest.families.clone(),
    };
    let blob = std::fs::read(blob_path(manifest_path, &manifest.blob_file))?;
    if blob.len() as u64 != manifest.blob_len_bytes {
        return Err(NlmError::BadCheckpoint(format!(
            "blob length {} does not match manifest ({})",
            blob.len(),
            manifest.blob_len_bytes
        )));
    }
    match manifest.backend {
        BackendKind::Nlm => {
            let dims = manifest
                .dims
                .ok_or_else(|| NlmError::BadCheckpoint("missing dims".into()))?;
            let config = manifest
                .config
                .ok_or_else(|| NlmError::BadCheckpoint("missing config".into()))?;
            if dims.vocab != vocab.len()
                || dims.author_rows != tables.author_rows()
                || dims.family_rows != tables.family_rows()
            {
                return Err(NlmError::BadCheckpoint(
                    "dims inconsistent with vocabulary/tables".into(),
                ));
            }
            let mut params = NlmParams::<f32>::zeros(dims);
            let expected = params.param_count() * 4;
            if blob.len() != expected {
                return Err(NlmError::BadCheckpoint(format!(
                    "blob holds {} bytes, model needs {expected}",
                    blob.len()
                )));
            }
            let mut offset = 0usize;
            for slot in params.slots_mut() {
                for v in slot.iter_mut() {
                    let bytes: [u8; 4] = blob[offset..offset + 4].try_into().unwrap();
                    *v = f32::from_le_bytes(bytes);
                    offset += 4;
                }
            }
            params.check_finite()?;
            Ok(Checkpoint::Nlm(TrainedModel {
                params,
                vocab,
                tables,
                config,
                log: Default::default(),
            }))
        }
        BackendKind::Ngram => {
            let model = NgramModel::load(blob.as_slice())
                .map_err(|e| NlmError::BadCheckpoint(e.to_string()))?;
            if model.vocab_size() != vocab.len() {
                return Err(NlmError::BadCheckpoint(
                    "n-gram table vocabulary size does not match manifest".into(),
                ));
            }
            Ok(Checkpoint::Ngram {
                model,
                vocab,
                tables,
            })
        }
    }
}

/// What `ppl`-style consumers need regardless of backend.
impl Checkpoint {
    pub fn vocab(&self) -> &Vocabulary {
        match self {
            Checkpoint::Nlm(m) => &m.vocab,
            Checkpoint::Ngram { vocab, .. } => vocab,
        }
    }

    pub fn tables(&self) -> &CondTables {
        match self {
            Checkpoint::Nlm(m) => &m.tables,
            Checkpoint::Ngram { tables, .. } => tables,
        }
    }
}

