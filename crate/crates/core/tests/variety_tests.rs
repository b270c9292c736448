//! Structure of the distance matrices and the behavior of the pairwise
//! experiment under both backends.

use varia_core::corpus::{group_by_period, Corpus};
use varia_core::fixtures::{four_group_corpus, rich_simple_groups};
use varia_core::nlm::TrainConfig;
use varia_core::variety::{
    variety_matrix, Backend, DistanceConfig, VarietyError, VarietyMatrix,
};

fn ngram_config(seed: u64) -> DistanceConfig {
    DistanceConfig {
        backend: Backend::Ngram,
        seed,
        ..DistanceConfig::default()
    }
}

fn nlm_config(seed: u64) -> DistanceConfig {
    let mut cfg = DistanceConfig {
        backend: Backend::Nlm,
        seed,
        ..DistanceConfig::default()
    };
    cfg.nlm = TrainConfig::small(seed);
    cfg.nlm.max_epochs = 10;
    cfg
}

fn assert_structure(m: &VarietyMatrix) {
    let k = m.groups.len();
    for i in 0..k {
        assert_eq!(m.plr[i][i], 1.0, "PLR diagonal must be exactly 1");
        assert_eq!(
            m.pld[i][i].to_bits(),
            m.directed[i][i].to_bits(),
            "PLD diagonal is the model's own-corpus perplexity"
        );
        for j in 0..k {
            assert!(m.directed[i][j] >= 1.0, "perplexities are at least 1");
            assert_eq!(
                m.pld[i][j].to_bits(),
                m.pld[j][i].to_bits(),
                "PLD must be symmetric bit-for-bit"
            );
            if i != j {
                let product = m.plr[i][j] * m.plr[j][i];
                assert!(
                    (product - 1.0).abs() < 1e-12,
                    "PLR antisymmetry violated: {product}"
                );
            }
        }
    }
}

#[test]
fn four_group_matrix_structure_ngram() {
    let (docs, mapping) = four_group_corpus(5);
    let corpus = Corpus::from_documents(docs);
    let groups = group_by_period(&corpus, &mapping).unwrap();
    let m = variety_matrix(&groups, &ngram_config(5)).unwrap();
    assert_eq!(m.groups.len(), 4);
    assert_structure(&m);
    assert_eq!(m.report_pairs().len(), 6);
}

#[test]
fn four_group_matrix_structure_nlm() {
    let (docs, mapping) = four_group_corpus(5);
    let corpus = Corpus::from_documents(docs);
    let groups = group_by_period(&corpus, &mapping).unwrap();
    let m = variety_matrix(&groups, &nlm_config(5)).unwrap();
    assert_eq!(m.groups.len(), 4);
    assert_structure(&m);
}

#[test]
fn identical_copies_have_unit_ratio() {
    // two groups with the same contents train identically (content-derived
    // seeds), so the ratio is exactly 1 and the off-diagonal distance
    // matches the diagonal
    let (rich, _) = rich_simple_groups(13);
    let mut copy = rich.clone();
    copy.name = "R2".into();
    let m = variety_matrix(&[rich, copy], &ngram_config(13)).unwrap();
    assert!((m.plr[0][1] - 1.0).abs() < 1e-6, "PLR {}", m.plr[0][1]);
    assert!(
        (m.pld[0][1] - m.pld[0][0]).abs() < 1e-6,
        "off-diagonal {} vs diagonal {}",
        m.pld[0][1],
        m.pld[0][0]
    );
}

#[test]
fn identical_copies_have_unit_ratio_nlm() {
    let (_, simple) = rich_simple_groups(13);
    let mut copy = simple.clone();
    copy.name = "S2".into();
    let mut cfg = nlm_config(13);
    cfg.nlm.max_epochs = 3;
    let m = variety_matrix(&[simple, copy], &cfg).unwrap();
    assert!((m.plr[0][1] - 1.0).abs() < 1e-6, "PLR {}", m.plr[0][1]);
    assert!((m.pld[0][1] - m.pld[0][0]).abs() < 1e-6);
}

#[test]
fn single_group_is_rejected() {
    let (rich, _) = rich_simple_groups(1);
    match variety_matrix(&[rich], &ngram_config(1)) {
        Err(VarietyError::TooFewGroups(1)) => {}
        other => panic!("expected too-few-groups, got {other:?}"),
    }
}

#[test]
fn parallel_and_sequential_runs_agree() {
    let (docs, mapping) = four_group_corpus(8);
    let corpus = Corpus::from_documents(docs);
    let groups = group_by_period(&corpus, &mapping).unwrap();
    let sequential = variety_matrix(&groups, &ngram_config(8)).unwrap();
    let mut parallel_cfg = ngram_config(8);
    parallel_cfg.jobs = 3;
    let parallel = variety_matrix(&groups, &parallel_cfg).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(
                sequential.directed[i][j].to_bits(),
                parallel.directed[i][j].to_bits(),
                "scheduling must not change results"
            );
        }
    }
}

#[test]
fn rich_simple_asymmetry_ngram() {
    let (rich, simple) = rich_simple_groups(21);
    let m = variety_matrix(&[rich, simple], &ngram_config(21)).unwrap();
    // rows are the model's training corpus: [0] = R, [1] = S
    assert!(
        m.plr[1][0] > 1.0,
        "PLR(S, R) must exceed 1, got {}",
        m.plr[1][0]
    );
    assert!(m.plr[0][1] < 1.0);
}

#[test]
fn matrix_csv_has_group_headers() {
    let (docs, mapping) = four_group_corpus(2);
    let corpus = Corpus::from_documents(docs);
    let groups = group_by_period(&corpus, &mapping).unwrap();
    let m = variety_matrix(&groups, &ngram_config(2)).unwrap();
    let csv = VarietyMatrix::matrix_csv(&m.groups, &m.pld);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "group,XIII,XIV,XV-XVI-1,XV-XVI-2");
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().nth(1).unwrap().starts_with("XIII,"));
}
