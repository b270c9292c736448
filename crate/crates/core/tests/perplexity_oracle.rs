//! The n-gram perplexity path checked against a brute-force scorer that
//! recounts contexts by scanning the training data and multiplies raw
//! probabilities directly.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use varia_core::lm::perplexity;
use varia_core::ngram::NgramModel;

mod common;
use common::brute_force_perplexity;

#[test]
fn brute_force_agrees_on_tiny_corpora() {
    let cases: Vec<(Vec<Vec<u32>>, Vec<Vec<u32>>)> = vec![
        (vec![[0u32, 1].repeat(30)], vec![[0u32, 1].repeat(20)]),
        (
            vec![vec![0, 1, 2, 3, 2, 1, 0], vec![3, 3, 1, 0]],
            vec![vec![0, 1, 2, 2, 3], vec![1, 0]],
        ),
        (vec![vec![4, 4, 4, 4, 4, 4]], vec![vec![4, 4, 4]]),
    ];
    for (train, eval) in cases {
        for n in [1usize, 2, 3] {
            for alpha in [0.05, 0.5, 1.0] {
                let model = NgramModel::fit(&train, n, alpha, 5, 6).unwrap();
                let fast = perplexity(&model, &eval).unwrap();
                let brute = brute_force_perplexity(&train, &eval, n, alpha, 5, 6);
                let rel = (fast - brute).abs() / brute;
                assert!(
                    rel < 1e-9,
                    "n={n} alpha={alpha}: {fast} vs brute {brute} (rel {rel:.2e})"
                );
                assert!(fast >= 1.0);
            }
        }
    }
}

#[test]
fn brute_force_agrees_on_random_corpora() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for round in 0..5 {
        let vocab = rng.random_range(3..8usize);
        let train: Vec<Vec<u32>> = (0..3)
            .map(|_| {
                (0..rng.random_range(10..34))
                    .map(|_| rng.random_range(0..vocab as u32))
                    .collect()
            })
            .collect();
        let eval: Vec<Vec<u32>> = (0..2)
            .map(|_| {
                (0..rng.random_range(5..50))
                    .map(|_| rng.random_range(0..vocab as u32))
                    .collect()
            })
            .collect();
        let n = rng.random_range(1..4usize);
        let alpha = 0.3;
        let model = NgramModel::fit(&train, n, alpha, vocab, vocab as u32).unwrap();
        let fast = perplexity(&model, &eval).unwrap();
        let brute = brute_force_perplexity(&train, &eval, n, alpha, vocab, vocab as u32);
        let rel = (fast - brute).abs() / brute;
        assert!(rel < 1e-9, "round {round}: {fast} vs {brute}");
    }
}

#[test]
fn on_train_perplexity_stays_under_smoothed_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let vocab = 9usize;
    let train: Vec<Vec<u32>> = (0..4)
        .map(|_| {
            (0..80)
                .map(|_| rng.random_range(0..vocab as u32))
                .collect()
        })
        .collect();
    for n in [1usize, 2, 3, 5] {
        let model = NgramModel::fit(&train, n, 0.1, vocab, vocab as u32).unwrap();
        let pp = perplexity(&model, &train).unwrap();
        assert!(pp >= 1.0);
        assert!(
            pp <= vocab as f64 * 1.05,
            "on-train perplexity {pp} should stay near or below |V| = {vocab}"
        );
    }
}

#[test]
fn richer_corpus_is_harder_for_the_poorer_model() {
    // the n-gram end of the asymmetry check: a model of the subset variety
    // is more surprised by the rich corpus than vice versa
    let (rich, simple) = varia_core::fixtures::rich_simple_groups(31);
    let to_seqs = |g: &varia_core::corpus::CorpusGroup| -> (Vec<Vec<u32>>, usize) {
        let vocab = varia_core::nlm::Vocabulary::build(
            &g.documents,
            varia_core::nlm::Granularity::Char,
            Default::default(),
        )
        .unwrap();
        let seqs = g
            .documents
            .iter()
            .map(|d| vocab.encode_text(&d.text))
            .collect();
        (seqs, vocab.len())
    };
    let (rich_seqs, _) = to_seqs(&rich);
    let (simple_seqs, _) = to_seqs(&simple);
    // each side encodes the other with its own vocabulary
    let rich_vocab = varia_core::nlm::Vocabulary::build(
        &rich.documents,
        varia_core::nlm::Granularity::Char,
        Default::default(),
    )
    .unwrap();
    let simple_vocab = varia_core::nlm::Vocabulary::build(
        &simple.documents,
        varia_core::nlm::Granularity::Char,
        Default::default(),
    )
    .unwrap();
    let rich_model = NgramModel::fit(&rich_seqs, 5, 0.1, rich_vocab.len(), 0).unwrap();
    let simple_model = NgramModel::fit(&simple_seqs, 5, 0.1, simple_vocab.len(), 0).unwrap();
    let rich_on_simple: Vec<Vec<u32>> = simple
        .documents
        .iter()
        .map(|d| rich_vocab.encode_text(&d.text))
        .collect();
    let simple_on_rich: Vec<Vec<u32>> = rich
        .documents
        .iter()
        .map(|d| simple_vocab.encode_text(&d.text))
        .collect();
    let pp_rs = perplexity(&rich_model, &rich_on_simple).unwrap();
    let pp_sr = perplexity(&simple_model, &simple_on_rich).unwrap();
    assert!(
        pp_sr > pp_rs,
        "poor->rich ({pp_sr}) must exceed rich->poor ({pp_rs})"
    );
}
