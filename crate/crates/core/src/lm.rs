//! The scorer abstraction shared by every language-model backend, and the
//! single perplexity definition both backends use.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LmError {
    #[error("empty evaluation data")]
    EmptyEval,
    #[error("non-finite log-likelihood")]
    NonFinite,
    #[error("token id {id} out of vocabulary (size {vocab})")]
    OutOfVocabulary { id: u32, vocab: usize },
    #[error("empty training data")]
    EmptyTraining,
}

/// Anything that can assign a log-likelihood to a token-id sequence.
pub trait LanguageModel {
    /// Natural-log likelihood of the sequence plus the number of predicted
    /// tokens it contributes.
    fn sequence_log_prob(&self, seq: &[u32]) -> Result<(f64, usize), LmError>;
}

/// Perplexity is the natural exponential of the mean negative log-likelihood
/// per predicted token. The base is a convention: any fixed base yields the
/// same PLR and the same PLD ordering.
pub fn perplexity_from_nll(total_nll: f64, predicted_tokens: usize) -> Result<f64, LmError> {
    if predicted_tokens == 0 {
        return Err(LmError::EmptyEval);
    }
    if !total_nll.is_finite() {
        return Err(LmError::NonFinite);
    }
    Ok((total_nll / predicted_tokens as f64).exp())
}

/// Corpus perplexity of a model over a set of sequences.
pub fn perplexity<M: LanguageModel>(model: &M, eval: &[Vec<u32>]) -> Result<f64, LmError> {
    let mut nll = 0.0f64;
    let mut tokens = 0usize;
    for seq in eval {
        let (logp, n) = model.sequence_log_prob(seq)?;
        nll -= logp;
        tokens += n;
    }
    perplexity_from_nll(nll, tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Uniform {
        vocab: usize,
    }

    impl LanguageModel for Uniform {
        fn sequence_log_prob(&self, seq: &[u32]) -> Result<(f64, usize), LmError> {
            Ok((
                seq.len() as f64 * (1.0 / self.vocab as f64).ln(),
                seq.len(),
            ))
        }
    }

    #[test]
    fn uniform_perplexity_is_vocab_size() {
        let model = Uniform { vocab: 37 };
        let data = vec![vec![0u32; 10], vec![0u32; 3]];
        let pp = perplexity(&model, &data).unwrap();
        assert!((pp - 37.0).abs() < 1e-9);
    }

    #[test]
    fn empty_eval_is_an_error() {
        let model = Uniform { vocab: 5 };
        assert!(perplexity(&model, &[]).is_err());
        assert!(perplexity_from_nll(0.0, 0).is_err());
    }
}
