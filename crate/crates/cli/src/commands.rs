//! Command implementations.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::json;
use varia_core::corpus::{
    self, default_group_mapping, group_by_period, parse_corpus, parse_group_mapping, Corpus,
    CorpusError, CorpusGroup,
};
use varia_core::fixtures;
use varia_core::nlm;
use varia_core::projection::{self, PointLabel, PointSet, TsneConfig};
use varia_core::textstats;
use varia_core::variety::{self, Backend, GroupModel, VarietyMatrix};

use crate::config::FileConfig;
use crate::manifest::RunManifest;
use crate::{CmdError, CmdResult, FixtureKind};

fn corpus_error(e: CorpusError) -> CmdError {
    match e {
        CorpusError::Io(inner) => CmdError::io(format!("corpus file: {inner}")),
        other => CmdError::usage(other.to_string()),
    }
}

fn load_corpus(path: &Path) -> Result<corpus::ParseOutcome, CmdError> {
    parse_corpus(path).map_err(corpus_error)
}

fn load_mapping(path: &Path) -> Result<BTreeMap<String, String>, CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CmdError::io(format!("mapping file {}: {e}", path.display())))?;
    parse_group_mapping(&text).map_err(|e| CmdError::usage(e.to_string()))
}

fn ensure_out_dir(path: &Path) -> Result<(), CmdError> {
    std::fs::create_dir_all(path)
        .map_err(|e| CmdError::io(format!("output directory {}: {e}", path.display())))
}

fn write_out(path: &Path, contents: &str, manifest: &mut RunManifest) -> Result<(), CmdError> {
    std::fs::write(path, contents)
        .map_err(|e| CmdError::io(format!("cannot write {}: {e}", path.display())))?;
    manifest.add_output(path);
    Ok(())
}

pub fn validate(corpus_path: &Path, strict: bool) -> CmdResult {
    let outcome = load_corpus(corpus_path)?;
    for issue in &outcome.issues {
        println!("warning: {issue}");
    }
    println!(
        "{} documents, {} errors",
        outcome.corpus.len(),
        outcome.issues.len()
    );
    if strict && !outcome.issues.is_empty() {
        return Err(CmdError::usage(format!(
            "strict mode: {} invalid record(s)",
            outcome.issues.len()
        )));
    }
    Ok(())
}

pub fn stats(
    corpus_path: &Path,
    mapping_path: Option<&Path>,
    out_dir: &Path,
    charts: bool,
) -> CmdResult {
    let outcome = load_corpus(corpus_path)?;
    let corpus = &outcome.corpus;
    ensure_out_dir(out_dir)?;
    let mut manifest = RunManifest::new("stats", json!({"charts": charts}), None);
    manifest
        .add_input(corpus_path)
        .map_err(|e| CmdError::io(e.to_string()))?;

    let breakdown = textstats::family_breakdown(corpus);
    write_out(
        &out_dir.join("family_breakdown.csv"),
        &textstats::family_breakdown_csv(&breakdown),
        &mut manifest,
    )?;
    write_out(
        &out_dir.join("word_stats.csv"),
        &textstats::word_stats_csv(corpus),
        &mut manifest,
    )?;
    write_out(
        &out_dir.join("lengths.csv"),
        &textstats::length_distribution_csv(&textstats::length_distribution(corpus)),
        &mut manifest,
    )?;
    if let Some(mp) = mapping_path {
        let mapping = load_mapping(mp)?;
        manifest
            .add_input(mp)
            .map_err(|e| CmdError::io(e.to_string()))?;
        let groups = group_by_period(corpus, &mapping).map_err(corpus_error)?;
        let stats = textstats::group_stats(&groups);
        write_out(
            &out_dir.join("group_stats.csv"),
            &textstats::group_stats_csv(&stats),
            &mut manifest,
        )?;
    }
    if charts {
        write_out(
            &out_dir.join("family_words.svg"),
            &textstats::family_words_svg(&breakdown),
            &mut manifest,
        )?;
    }
    manifest
        .write(out_dir)
        .map_err(|e| CmdError::io(e.to_string()))?;
    println!(
        "{} documents across {} families; outputs in {}",
        corpus.len(),
        breakdown.rows.len(),
        out_dir.display()
    );
    Ok(())
}

fn groups_for(
    corpus: &Corpus,
    mapping_path: &Path,
) -> Result<Vec<CorpusGroup>, CmdError> {
    let mapping = load_mapping(mapping_path)?;
    group_by_period(corpus, &mapping).map_err(corpus_error)
}

pub fn train(
    corpus_path: &Path,
    mapping_path: &Path,
    group_name: &str,
    backend: Backend,
    config_path: Option<&Path>,
    seed: Option<u64>,
    out_dir: &Path,
) -> CmdResult {
    let outcome = load_corpus(corpus_path)?;
    let groups = groups_for(&outcome.corpus, mapping_path)?;
    let group = groups
        .iter()
        .find(|g| g.name == group_name)
        .ok_or_else(|| {
            let known: Vec<&str> = groups.iter().map(|g| g.name.as_str()).collect();
            CmdError::usage(format!(
                "no group named '{group_name}' (known: {})",
                known.join(", ")
            ))
        })?;
    let file_cfg = FileConfig::load(config_path).map_err(|e| CmdError::usage(e.to_string()))?;
    let dist_cfg = file_cfg.distance_config(backend, seed, None);

    ensure_out_dir(out_dir)?;
    let mut manifest = RunManifest::new(
        "train",
        serde_json::to_value(&dist_cfg).expect("config serializes"),
        Some(dist_cfg.seed),
    );
    manifest
        .add_input(corpus_path)
        .map_err(|e| CmdError::io(e.to_string()))?;
    manifest
        .add_input(mapping_path)
        .map_err(|e| CmdError::io(e.to_string()))?;

    let model = variety::train_group_model(group, &dist_cfg)
        .map_err(|e| CmdError::usage(e.to_string()))?;
    let manifest_path = out_dir.join("model.json");
    match &model {
        GroupModel::Nlm(trained) => {
            nlm::save_nlm(trained, &manifest_path)
                .map_err(|e| CmdError::io(e.to_string()))?;
            let log_path = out_dir.join("training_log.jsonl");
            write_out(&log_path, &trained.log.to_jsonl(), &mut manifest)?;
            let best = trained.log.best().unwrap_or(f64::NAN);
            println!("trained '{group_name}' ({backend}); best heldout perplexity {best:.4}");
        }
        GroupModel::Ngram {
            model,
            vocab,
            tables,
        } => {
            nlm::save_ngram(model, vocab, tables, &manifest_path)
                .map_err(|e| CmdError::io(e.to_string()))?;
            println!(
                "trained '{group_name}' ({backend}); {} contexts over a vocabulary of {}",
                model.total_observations(),
                vocab.len()
            );
        }
    }
    manifest.add_output(&manifest_path);
    manifest.add_output(&out_dir.join("model.bin"));
    manifest
        .write(out_dir)
        .map_err(|e| CmdError::io(e.to_string()))?;
    Ok(())
}

pub fn ppl(
    corpus_path: &Path,
    model_path: &Path,
    mapping_path: Option<&Path>,
    group_name: Option<&str>,
) -> CmdResult {
    let checkpoint = nlm::load_checkpoint(model_path).map_err(|e| match e {
        nlm::NlmError::Io(inner) => CmdError::io(format!("checkpoint: {inner}")),
        other => CmdError::usage(other.to_string()),
    })?;
    let outcome = load_corpus(corpus_path)?;
    let docs: Vec<corpus::Document> = match (mapping_path, group_name) {
        (Some(mp), Some(name)) => {
            let groups = groups_for(&outcome.corpus, mp)?;
            groups
                .into_iter()
                .find(|g| g.name == name)
                .ok_or_else(|| CmdError::usage(format!("no group named '{name}'")))?
                .documents
        }
        (None, None) => outcome.corpus.documents().to_vec(),
        _ => {
            return Err(CmdError::usage(
                "--mapping and --group must be given together",
            ))
        }
    };
    if docs.is_empty() {
        return Err(CmdError::usage("no documents to evaluate"));
    }
    // count unknown-mapped tokens so vocabulary mismatches are visible
    let vocab = checkpoint.vocab();
    let mut unknowns = 0usize;
    let mut total = 0usize;
    for d in &docs {
        let ids = vocab.encode_text(&d.text);
        unknowns += vocab.unknown_count(&ids);
        total += ids.len();
    }
    if unknowns > 0 {
        eprintln!(
            "warning: {unknowns} of {total} tokens mapped to the unknown token"
        );
    }
    let nlm_cfg = match &checkpoint {
        nlm::Checkpoint::Nlm(m) => m.config.clone(),
        _ => Default::default(),
    };
    let model = GroupModel::from_checkpoint(checkpoint);
    let pp = model
        .perplexity_on(&docs, &nlm_cfg)
        .map_err(|e| CmdError::usage(e.to_string()))?;
    println!("perplexity: {pp:.6} over {} documents", docs.len());
    Ok(())
}

pub fn distance(
    corpus_path: &Path,
    mapping_path: &Path,
    backend: Backend,
    config_path: Option<&Path>,
    seed: Option<u64>,
    jobs: Option<usize>,
    out_dir: &Path,
) -> CmdResult {
    let outcome = load_corpus(corpus_path)?;
    let groups = groups_for(&outcome.corpus, mapping_path)?;
    for g in &groups {
        if g.documents.is_empty() {
            eprintln!("warning: group '{}' is empty and will be skipped", g.name);
        }
    }
    let file_cfg = FileConfig::load(config_path).map_err(|e| CmdError::usage(e.to_string()))?;
    let dist_cfg = file_cfg.distance_config(backend, seed, jobs);
    let matrix = variety::variety_matrix(&groups, &dist_cfg).map_err(|e| match e {
        variety::VarietyError::TooFewGroups(n) => {
            CmdError::usage(format!("need >= 2 nonempty groups, got {n}"))
        }
        other => CmdError::usage(other.to_string()),
    })?;

    ensure_out_dir(out_dir)?;
    let mut manifest = RunManifest::new(
        "distance",
        serde_json::to_value(&dist_cfg).expect("config serializes"),
        Some(dist_cfg.seed),
    );
    manifest
        .add_input(corpus_path)
        .map_err(|e| CmdError::io(e.to_string()))?;
    manifest
        .add_input(mapping_path)
        .map_err(|e| CmdError::io(e.to_string()))?;
    write_out(
        &out_dir.join("pld.csv"),
        &VarietyMatrix::matrix_csv(&matrix.groups, &matrix.pld),
        &mut manifest,
    )?;
    write_out(
        &out_dir.join("plr.csv"),
        &VarietyMatrix::matrix_csv(&matrix.groups, &matrix.plr),
        &mut manifest,
    )?;
    write_out(
        &out_dir.join("directed.csv"),
        &VarietyMatrix::matrix_csv(&matrix.groups, &matrix.directed),
        &mut manifest,
    )?;
    write_out(
        &out_dir.join("report.json"),
        &serde_json::to_string_pretty(&matrix).expect("matrix serializes"),
        &mut manifest,
    )?;
    manifest
        .write(out_dir)
        .map_err(|e| CmdError::io(e.to_string()))?;

    println!("PLD ({backend}):");
    print!("{}", VarietyMatrix::matrix_csv(&matrix.groups, &matrix.pld));
    println!("PLR (rows are the model's training corpus):");
    print!("{}", VarietyMatrix::matrix_csv(&matrix.groups, &matrix.plr));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn project(
    corpus_path: &Path,
    model_path: &Path,
    mapping_path: Option<&Path>,
    config_path: Option<&Path>,
    perplexity: Option<f64>,
    iterations: Option<usize>,
    seed: Option<u64>,
    out_dir: &Path,
) -> CmdResult {
    let checkpoint = nlm::load_checkpoint(model_path).map_err(|e| match e {
        nlm::NlmError::Io(inner) => CmdError::io(format!("checkpoint: {inner}")),
        other => CmdError::usage(other.to_string()),
    })?;
    let trained = match &checkpoint {
        nlm::Checkpoint::Nlm(m) => m,
        nlm::Checkpoint::Ngram { .. } => {
            return Err(CmdError::usage(
                "projection needs a neural checkpoint (n-gram models have no hidden states)",
            ))
        }
    };
    let outcome = load_corpus(corpus_path)?;
    let docs = outcome.corpus.documents();

    // group labels come from the mapping when given
    let family_to_group: BTreeMap<String, String> = match mapping_path {
        Some(mp) => load_mapping(mp)?,
        None => docs
            .iter()
            .map(|d| (d.family.clone(), "all".to_string()))
            .collect(),
    };
    for d in docs {
        if !family_to_group.contains_key(&d.family) {
            return Err(CmdError::usage(format!(
                "family '{}' is not covered by the group mapping",
                d.family
            )));
        }
    }

    let mut unknowns = 0usize;
    let mut total = 0usize;
    for d in docs {
        let ids = trained.vocab.encode_text(&d.text);
        unknowns += trained.vocab.unknown_count(&ids);
        total += ids.len();
    }
    if unknowns > 0 {
        eprintln!("warning: {unknowns} of {total} tokens mapped to the unknown token");
    }

    let (states, skipped) =
        nlm::extract_states(&trained.params, &trained.vocab, &trained.tables, docs)
            .map_err(|e| CmdError::usage(e.to_string()))?;
    if skipped > 0 {
        eprintln!("warning: {skipped} documents encode to zero tokens and were skipped");
    }
    if states.len() < 2 {
        return Err(CmdError::usage("need at least 2 documents to project"));
    }

    let points: Vec<Vec<f64>> = states
        .iter()
        .map(|s| s.state.iter().map(|&v| v as f64).collect())
        .collect();
    let labels: Vec<PointLabel> = states
        .iter()
        .map(|s| PointLabel {
            group: family_to_group[&s.family].clone(),
            kind: s.kind.to_string(),
        })
        .collect();
    let set = PointSet::new(points, labels).map_err(|e| CmdError::usage(e.to_string()))?;

    let file_cfg = FileConfig::load(config_path).map_err(|e| CmdError::usage(e.to_string()))?;
    let mut tsne_cfg: TsneConfig = file_cfg.tsne;
    if let Some(p) = perplexity {
        tsne_cfg.perplexity = p;
    }
    if let Some(it) = iterations {
        tsne_cfg.iterations = it;
    }
    if let Some(s) = seed {
        tsne_cfg.seed = s;
    }
    let (layout, trace) =
        projection::tsne(&set, &tsne_cfg).map_err(|e| CmdError::usage(e.to_string()))?;

    ensure_out_dir(out_dir)?;
    let mut manifest = RunManifest::new(
        "project",
        serde_json::to_value(tsne_cfg).expect("config serializes"),
        Some(tsne_cfg.seed),
    );
    manifest
        .add_input(corpus_path)
        .map_err(|e| CmdError::io(e.to_string()))?;
    manifest
        .add_input(model_path)
        .map_err(|e| CmdError::io(e.to_string()))?;
    let csv_path = out_dir.join("layout.csv");
    let svg_path = out_dir.join("layout.svg");
    projection::export_plot(&layout, &csv_path, &svg_path).map_err(|e| match e {
        projection::ProjectionError::Io(inner) => CmdError::io(inner.to_string()),
        other => CmdError::usage(other.to_string()),
    })?;
    manifest.add_output(&csv_path);
    manifest.add_output(&svg_path);
    let mut trace_csv = String::from("iteration,kl\n");
    for (i, v) in trace.iter().enumerate() {
        trace_csv.push_str(&format!("{i},{v:.8}\n"));
    }
    write_out(&out_dir.join("kl_trace.csv"), &trace_csv, &mut manifest)?;
    manifest
        .write(out_dir)
        .map_err(|e| CmdError::io(e.to_string()))?;
    println!(
        "projected {} documents; final KL {:.4}; outputs in {}",
        layout.len(),
        trace.last().unwrap(),
        out_dir.display()
    );
    Ok(())
}

pub fn fixtures_generate(kind: FixtureKind, out_dir: &Path, seed: u64) -> CmdResult {
    ensure_out_dir(out_dir)?;
    let mut manifest = RunManifest::new(
        "fixtures generate",
        json!({"kind": format!("{kind:?}"), "seed": seed}),
        Some(seed),
    );
    let (docs, mapping): (Vec<corpus::Document>, BTreeMap<String, String>) = match kind {
        FixtureKind::Demo => (fixtures::demo_corpus(), default_group_mapping()),
        FixtureKind::FourGroups => fixtures::four_group_corpus(seed),
        FixtureKind::Pattern => (
            fixtures::pattern_corpus(10, 400),
            BTreeMap::from([("Pattern".to_string(), "pattern".to_string())]),
        ),
        FixtureKind::RichSimple => {
            let (rich, simple) = fixtures::rich_simple_groups(seed);
            let mapping = BTreeMap::from([
                ("Ricca".to_string(), "R".to_string()),
                ("Semplice".to_string(), "S".to_string()),
            ]);
            let mut docs = rich.documents;
            docs.extend(simple.documents);
            (docs, mapping)
        }
        FixtureKind::Nested => {
            let (a, b, c) = fixtures::nested_groups(seed);
            let mapping = BTreeMap::from([
                ("FamA".to_string(), "A".to_string()),
                ("FamB".to_string(), "B".to_string()),
                ("FamC".to_string(), "C".to_string()),
            ]);
            let mut docs = a.documents;
            docs.extend(b.documents);
            docs.extend(c.documents);
            (docs, mapping)
        }
    };
    write_out(
        &out_dir.join("corpus.jsonl"),
        &fixtures::to_record_lines(&docs),
        &mut manifest,
    )?;
    write_out(
        &out_dir.join("mapping.json"),
        &serde_json::to_string_pretty(&mapping).expect("mapping serializes"),
        &mut manifest,
    )?;
    manifest
        .write(out_dir)
        .map_err(|e| CmdError::io(e.to_string()))?;
    println!(
        "wrote {} documents to {}",
        docs.len(),
        out_dir.join("corpus.jsonl").display()
    );
    Ok(())
}
