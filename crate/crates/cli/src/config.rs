//! The single structured config file: one JSON object with optional
//! sections for training, the n-gram backend, the distance experiment and
//! t-SNE. Missing sections take the documented defaults; a few common
//! fields can be overridden by flags.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use varia_core::nlm::TrainConfig;
use varia_core::projection::TsneConfig;
use varia_core::variety::{Backend, DistanceConfig, NgramConfig};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FileConfig {
    pub train: TrainConfig,
    pub ngram: NgramConfig,
    pub distance: DistanceSection,
    pub tsne: TsneConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DistanceSection {
    pub train_fraction: f64,
    pub jobs: usize,
}

impl Default for DistanceSection {
    fn default() -> Self {
        DistanceSection {
            train_fraction: 0.9,
            jobs: 0,
        }
    }
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(FileConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("cannot read config {}", p.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("invalid config {}", p.display()))
            }
        }
    }

    /// Assemble the distance-run configuration, applying flag overrides.
    pub fn distance_config(
        &self,
        backend: Backend,
        seed: Option<u64>,
        jobs: Option<usize>,
    ) -> DistanceConfig {
        let mut nlm = self.train.clone();
        if let Some(s) = seed {
            nlm.seed = s;
        }
        DistanceConfig {
            backend,
            train_fraction: self.distance.train_fraction,
            seed: seed.unwrap_or(nlm.seed),
            ngram: self.ngram,
            nlm,
            jobs: jobs.unwrap_or(self.distance.jobs),
        }
    }
}
