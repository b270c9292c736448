//! Finite-difference verification of the model's backward pass.
//!
//! The check runs the whole model in f64 so the oracle is limited by the
//! central-difference truncation error, not by float noise.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::nlm::model::{ModelDims, NlmParams};
use crate::nlm::vocab::ConditioningIds;
use crate::nlm::NlmError;
use crate::tensorcore::{compare_gradients, GradCheckReport};

/// A deliberately small model: the reference configuration is |V| = 12,
/// d = 8, h = 8 over a 6-token segment.
#[derive(Debug, Clone, Copy)]
pub struct GradCheckConfig {
    pub vocab: usize,
    pub embed: usize,
    pub hidden: usize,
    pub d_author: usize,
    pub d_family: usize,
    pub d_kind: usize,
    pub author_rows: usize,
    pub family_rows: usize,
    pub seq_len: usize,
    pub seed: u64,
    pub fd_step: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            vocab: 12,
            embed: 8,
            hidden: 8,
            d_author: 3,
            d_family: 3,
            d_kind: 2,
            author_rows: 3,
            family_rows: 3,
            seq_len: 6,
            seed: 17,
            fd_step: 1e-3,
        }
    }
}

impl GradCheckConfig {
    fn dims(&self) -> ModelDims {
        ModelDims {
            vocab: self.vocab,
            embed: self.embed,
            hidden: self.hidden,
            d_author: self.d_author,
            d_family: self.d_family,
            d_kind: self.d_kind,
            author_rows: self.author_rows,
            family_rows: self.family_rows,
        }
    }
}

fn mean_nll(
    params: &NlmParams<f64>,
    inputs: &[u32],
    targets: &[u32],
    cond: ConditioningIds,
) -> Result<f64, NlmError> {
    let (nll, n) = params.segment_nll(inputs, targets, cond)?;
    Ok(nll / n as f64)
}

/// Analytic and finite-difference gradients for every parameter slot, as
/// (name, analytic, numeric) triples.
pub fn gradient_pairs(
    config: &GradCheckConfig,
) -> Result<Vec<(String, Vec<f64>, Vec<f64>)>, NlmError> {
    let dims = config.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = NlmParams::<f64>::init(dims, &mut rng);
    let inputs: Vec<u32> = (0..config.seq_len)
        .map(|_| rng.random_range(0..config.vocab as u32))
        .collect();
    let targets: Vec<u32> = (0..config.seq_len)
        .map(|_| rng.random_range(0..config.vocab as u32))
        .collect();
    let cond = ConditioningIds {
        author: rng.random_range(0..config.author_rows as u32),
        family: rng.random_range(0..config.family_rows as u32),
        kind: rng.random_range(0..3),
    };

    let mut grads = NlmParams::<f64>::zeros(dims);
    let scale = 1.0 / config.seq_len as f64;
    let mut tape = params.forward_tape(&inputs, cond)?;
    tape.backward(&params, &targets, &mut grads, scale)?;
    let analytic: Vec<(String, Vec<f64>)> = grads
        .slots()
        .into_iter()
        .map(|(name, slot)| (name.to_string(), slot.to_vec()))
        .collect();

    let eps = config.fd_step;
    let mut numeric: Vec<(String, Vec<f64>)> = Vec::new();
    let n_slots = params.slots().len();
    for slot_idx in 0..n_slots {
        let name = params.slots()[slot_idx].0.to_string();
        let len = params.slots()[slot_idx].1.len();
        let mut num = vec![0.0f64; len];
        for k in 0..len {
            let original = params.slots()[slot_idx].1[k];
            params.slots_mut()[slot_idx][k] = original + eps;
            let up = mean_nll(&params, &inputs, &targets, cond)?;
            params.slots_mut()[slot_idx][k] = original - eps;
            let down = mean_nll(&params, &inputs, &targets, cond)?;
            params.slots_mut()[slot_idx][k] = original;
            num[k] = (up - down) / (2.0 * eps);
        }
        numeric.push((name, num));
    }

    Ok(analytic
        .into_iter()
        .zip(numeric)
        .map(|((name, a), (_, n))| (name, a, n))
        .collect())
}

/// Run the gradient check and report the maximum relative error across all
/// parameters.
pub fn grad_check(config: &GradCheckConfig, tolerance: f64) -> Result<GradCheckReport, NlmError> {
    let pairs = gradient_pairs(config)?;
    let slices: Vec<(&str, &[f64], &[f64])> = pairs
        .iter()
        .map(|(name, a, n)| (name.as_str(), a.as_slice(), n.as_slice()))
        .collect();
    Ok(compare_gradients(&slices, tolerance))
}
