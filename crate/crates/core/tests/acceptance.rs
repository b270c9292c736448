//! Acceptance suite: one test per release criterion, each printing a
//! PASS line when its assertions hold. Run with
//! `cargo test -p varia-core --test acceptance -- --nocapture` to see the
//! per-criterion lines.
//!
//! Published-table values are checked by exact arithmetic; model behavior
//! is checked on generated corpora with controlled structure, since the
//! original texts cannot ship and neural training is seed-dependent.

use varia_core::corpus::{group_by_period, split_train_heldout, Corpus, CorpusGroup, SplitSpec};
use varia_core::fixtures::{
    demo_corpus, four_group_corpus, nested_groups, pattern_corpus, rich_simple_groups,
};
use varia_core::lm::perplexity;
use varia_core::ngram::NgramModel;
use varia_core::nlm::{
    self, grad_check, CondTables, GradCheckConfig, Granularity, ModelDims, NlmParams,
    TrainConfig, Vocabulary, VocabOptions,
};
use varia_core::projection::{tsne, PointLabel, PointSet, TsneConfig};
use varia_core::textstats::{proportions_pct, WordStats};
use varia_core::variety::{variety_matrix, Backend, DistanceConfig, VarietyMatrix};

mod common;
use common::brute_force_perplexity;

fn pass(n: usize, name: &str, detail: String) {
    println!("ACCEPTANCE {n:2} ({name}): PASS  [{detail}]");
}

#[test]
fn criterion_01_word_average_arithmetic() {
    let global = WordStats::from_totals(4_090_166, 180_450);
    assert!((global.avg_occurrences_per_word - 22.67).abs() < 0.005);
    let poetry = WordStats::from_totals(1_925_838, 136_195);
    assert!((poetry.avg_occurrences_per_word - 14.14).abs() < 0.005);
    let prose = WordStats::from_totals(2_164_328, 69_135);
    assert!((prose.avg_occurrences_per_word - 31.31).abs() < 0.005);
    pass(
        1,
        "word-average arithmetic",
        format!(
            "global {:.2}, poetry {:.2}, prose {:.2}",
            global.avg_occurrences_per_word,
            poetry.avg_occurrences_per_word,
            prose.avg_occurrences_per_word
        ),
    );
}

#[test]
fn criterion_02_group_proportion_identity() {
    let props = proportions_pct(&[455_583, 1_480_379, 484_276, 1_669_928]);
    let expected = [11.14, 36.19, 11.84, 40.83];
    for (got, want) in props.iter().zip(expected) {
        assert!((got - want).abs() < 0.005, "{got} vs {want}");
    }
    let sum: f64 = props.iter().sum();
    assert!((sum - 100.0).abs() < 0.05);
    pass(2, "group proportion identity", format!("sum {sum:.2}%"));
}

#[test]
fn criterion_03_gradient_correctness() {
    let config = GradCheckConfig::default();
    assert_eq!(
        (config.vocab, config.embed, config.hidden, config.seq_len),
        (12, 8, 8, 6),
        "reference configuration"
    );
    let report = grad_check(&config, 1e-4).unwrap();
    assert!(
        report.passed,
        "max rel err {:.3e} at {}[{}]",
        report.max_rel_err, report.worst_param, report.worst_index
    );
    pass(
        3,
        "gradient correctness",
        format!(
            "max rel err {:.2e} over {} params (tied embedding included)",
            report.max_rel_err, report.n_checked
        ),
    );
}

#[test]
fn criterion_04_uniform_perplexity_identity() {
    let docs = demo_corpus();
    let vocab = Vocabulary::build(&docs, Granularity::Char, VocabOptions::default()).unwrap();
    let tables = CondTables::from_documents(&docs);
    let v = vocab.len() as f64;

    // all-zero-parameter neural model
    let dims = ModelDims {
        vocab: vocab.len(),
        embed: 16,
        hidden: 12,
        d_author: 4,
        d_family: 4,
        d_kind: 4,
        author_rows: tables.author_rows(),
        family_rows: tables.family_rows(),
    };
    let zero = NlmParams::<f32>::zeros(dims);
    let pp_nlm = nlm::perplexity_on(&zero, &vocab, &tables, &docs, 50).unwrap();
    assert!(
        (pp_nlm - v).abs() / v < 0.01,
        "all-zero NLM: {pp_nlm} vs |V| = {v}"
    );

    // fresh additive-smoothing n-gram
    let ngram = NgramModel::new(7, 0.1, vocab.len(), 0);
    let eval: Vec<Vec<u32>> = docs.iter().map(|d| vocab.encode_text(&d.text)).collect();
    let pp_ngram = perplexity(&ngram, &eval).unwrap();
    assert!(
        (pp_ngram - v).abs() < 1e-9,
        "uniform n-gram: {pp_ngram} vs |V| = {v}"
    );
    pass(
        4,
        "uniform-perplexity identity",
        format!("|V| = {v}; nlm {pp_nlm:.4}, ngram {pp_ngram:.12}"),
    );
}

#[test]
fn criterion_05_deterministic_corpus_learning() {
    let docs = pattern_corpus(10, 400);
    let total_chars: usize = docs.iter().map(|d| d.text.len()).sum();
    assert_eq!(total_chars, 4000);
    let group = CorpusGroup {
        name: "pattern".into(),
        families: vec!["Pattern".into()],
        documents: docs,
    };
    let (train_docs, heldout_docs) = split_train_heldout(
        &group,
        &SplitSpec {
            train_fraction: 0.9,
            seed: 7,
        },
    )
    .unwrap();

    // the n-gram oracle approaches perplexity 1 on this corpus
    let vocab =
        Vocabulary::build(&train_docs, Granularity::Char, VocabOptions::default()).unwrap();
    let train_seqs: Vec<Vec<u32>> = train_docs
        .iter()
        .map(|d| vocab.encode_text(&d.text))
        .collect();
    let heldout_seqs: Vec<Vec<u32>> = heldout_docs
        .iter()
        .map(|d| vocab.encode_text(&d.text))
        .collect();
    let oracle = NgramModel::fit(&train_seqs, 2, 1e-9, vocab.len(), 0).unwrap();
    let pp_oracle = perplexity(&oracle, &heldout_seqs).unwrap();
    assert!(pp_oracle < 1.01, "bigram oracle perplexity {pp_oracle}");

    let model = nlm::train(&train_docs, &heldout_docs, &TrainConfig::small(42)).unwrap();
    let best = model.log.best().unwrap();
    assert!(best <= 1.05, "neural heldout perplexity {best}");
    pass(
        5,
        "deterministic-corpus learning",
        format!("nlm heldout {best:.4}, ngram oracle {pp_oracle:.4}"),
    );
}

fn assert_matrix_structure(m: &VarietyMatrix) {
    let k = m.groups.len();
    assert_eq!(k, 4);
    for i in 0..k {
        assert_eq!(m.plr[i][i], 1.0, "PLR diagonal must be exactly 1.00");
        for j in 0..k {
            assert_eq!(
                m.pld[i][j].to_bits(),
                m.pld[j][i].to_bits(),
                "PLD symmetry"
            );
            if i != j {
                assert!(
                    (m.plr[i][j] * m.plr[j][i] - 1.0).abs() < 1e-12,
                    "PLR antisymmetry"
                );
            }
        }
    }
}

#[test]
fn criterion_06_distance_matrix_structure() {
    let (docs, mapping) = four_group_corpus(5);
    let corpus = Corpus::from_documents(docs);
    let groups = group_by_period(&corpus, &mapping).unwrap();

    let ngram_cfg = DistanceConfig {
        backend: Backend::Ngram,
        seed: 5,
        ..DistanceConfig::default()
    };
    let m_ngram = variety_matrix(&groups, &ngram_cfg).unwrap();
    assert_matrix_structure(&m_ngram);

    let mut nlm_cfg = DistanceConfig {
        backend: Backend::Nlm,
        seed: 5,
        ..DistanceConfig::default()
    };
    nlm_cfg.nlm = TrainConfig::small(5);
    nlm_cfg.nlm.max_epochs = 10;
    let m_nlm = variety_matrix(&groups, &nlm_cfg).unwrap();
    assert_matrix_structure(&m_nlm);
    pass(
        6,
        "distance-matrix structure",
        format!(
            "4x4 for both backends; ngram PLD(1,2) {:.2}, nlm PLD(1,2) {:.2}",
            m_ngram.pld[0][1], m_nlm.pld[0][1]
        ),
    );
}

#[test]
fn criterion_07_qualitative_asymmetry() {
    let mut ratios = Vec::new();
    for seed in [1u64, 2, 3] {
        let (rich, simple) = rich_simple_groups(seed);
        for backend in [Backend::Ngram, Backend::Nlm] {
            let mut cfg = DistanceConfig {
                backend,
                seed,
                ..DistanceConfig::default()
            };
            cfg.nlm = TrainConfig::small(seed);
            cfg.nlm.max_epochs = 10;
            let m = variety_matrix(&[rich.clone(), simple.clone()], &cfg).unwrap();
            let r = m.groups.iter().position(|g| g == "R").unwrap();
            let s = m.groups.iter().position(|g| g == "S").unwrap();
            let plr_sr = m.plr[s][r];
            assert!(
                plr_sr > 1.0,
                "seed {seed} {backend}: PLR(S, R) = {plr_sr} must exceed 1"
            );
            ratios.push(format!("{backend}/{seed}: {plr_sr:.2}"));
        }
    }
    pass(7, "qualitative asymmetry", ratios.join(", "));
}

#[test]
fn criterion_08_nested_variety_ordering() {
    let mut details = Vec::new();
    for seed in [1u64, 11, 42] {
        let (a, b, c) = nested_groups(seed);
        let cfg = DistanceConfig {
            backend: Backend::Ngram,
            seed,
            ..DistanceConfig::default()
        };
        let m = variety_matrix(&[a, b, c], &cfg).unwrap();
        let (ab, bc, ac) = (m.pld[0][1], m.pld[1][2], m.pld[0][2]);
        let bound = ab.max(bc) * 0.95;
        assert!(
            ac >= bound,
            "seed {seed}: PLD(A,C) = {ac:.3} below max(PLD(A,B), PLD(B,C)) - 5% = {bound:.3}"
        );
        details.push(format!("seed {seed}: AC {ac:.2} vs max(AB, BC) {:.2}", ab.max(bc)));
    }
    pass(8, "nested-variety ordering", details.join("; "));
}

#[test]
fn criterion_09_oracle_equivalence() {
    // every corpus here is at most 100 characters long
    let corpora: Vec<(Vec<Vec<u32>>, Vec<Vec<u32>>)> = vec![
        (vec![[0u32, 1].repeat(40)], vec![[0u32, 1].repeat(10)]),
        (
            vec![vec![0, 1, 2, 3, 2, 1, 0, 0, 3], vec![3, 3, 1, 0, 2]],
            vec![vec![0, 1, 2, 2, 3, 3, 0], vec![1, 0, 0]],
        ),
        (
            vec![vec![4, 0, 4, 0, 4, 1, 2, 3, 4, 0, 4]],
            vec![vec![4, 0, 4, 1], vec![2, 3], vec![0]],
        ),
    ];
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for (train, eval) in &corpora {
        for n in [1usize, 2, 3, 4] {
            for alpha in [0.1, 0.7] {
                let model = NgramModel::fit(train, n, alpha, 5, 6).unwrap();
                let fast = perplexity(&model, eval).unwrap();
                let brute = brute_force_perplexity(train, eval, n, alpha, 5, 6);
                let rel = (fast - brute).abs() / brute;
                assert!(rel < 1e-9, "n={n} alpha={alpha}: rel err {rel:.2e}");
                worst = worst.max(rel);
                checked += 1;
            }
        }
    }
    pass(
        9,
        "oracle equivalence",
        format!("{checked} model/corpus pairs, worst rel err {worst:.2e}"),
    );
}

#[test]
fn criterion_10_projection_sanity() {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);

    // two 10-d Gaussian-ish clusters separated by 20 sigma
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for cluster in 0..2 {
        for _ in 0..100 {
            let offset = if cluster == 0 { 0.0 } else { 20.0 };
            points.push(
                (0..10)
                    .map(|k| rng.random_range(-1.0..1.0) + if k == 0 { offset } else { 0.0 })
                    .collect::<Vec<f64>>(),
            );
            labels.push(PointLabel {
                group: if cluster == 0 { "uno" } else { "due" }.into(),
                kind: if cluster == 0 { "poetry" } else { "prose" }.into(),
            });
        }
    }
    let clusters = PointSet::new(points, labels).unwrap();

    // a second fixture: drifting lexicon states through the PCA pre-step
    let mut wide_points = Vec::new();
    for i in 0..60 {
        wide_points.push(
            (0..256)
                .map(|k| rng.random_range(-0.3..0.3) + if k % 7 == i % 7 { 0.5 } else { 0.0 })
                .collect::<Vec<f64>>(),
        );
    }
    let wide = PointSet::new(
        wide_points,
        (0..60)
            .map(|i| PointLabel {
                group: format!("g{}", i % 3),
                kind: "poetry".into(),
            })
            .collect(),
    )
    .unwrap();

    let mut purity = 0.0;
    for (name, set, perplexity) in [("clusters", &clusters, 20.0), ("wide", &wide, 10.0)] {
        let cfg = TsneConfig {
            perplexity,
            iterations: 400,
            seed: 3,
            ..TsneConfig::default()
        };
        let (layout, trace) = tsne(set, &cfg).unwrap();
        assert!(
            trace.last().unwrap() <= trace.first().unwrap(),
            "{name}: KL rose from {} to {}",
            trace.first().unwrap(),
            trace.last().unwrap()
        );
        if name == "clusters" {
            // independent 1-nearest-neighbor purity over the layout
            let n = layout.len();
            let mut correct = 0usize;
            for i in 0..n {
                let mut best = f64::INFINITY;
                let mut best_j = usize::MAX;
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let d: f64 = layout.points()[i]
                        .iter()
                        .zip(&layout.points()[j])
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum();
                    if d < best {
                        best = d;
                        best_j = j;
                    }
                }
                if layout.labels()[i].group == layout.labels()[best_j].group {
                    correct += 1;
                }
            }
            purity = correct as f64 / n as f64;
            assert!(purity > 0.95, "1-NN purity {purity}");
        }
    }
    pass(
        10,
        "projection sanity",
        format!("KL non-increasing on every fixture; two-cluster 1-NN purity {purity:.3}"),
    );
}
