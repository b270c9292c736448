//! `varia`: corpus validation and statistics, language-model training,
//! perplexity evaluation, variety-distance matrices, and 2-d projections of
//! learned document states.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "varia", version, about = "Diachronic language-variety toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BackendArg {
    Ngram,
    Nlm,
}

impl From<BackendArg> for varia_core::variety::Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Ngram => varia_core::variety::Backend::Ngram,
            BackendArg::Nlm => varia_core::variety::Backend::Nlm,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FixtureKind {
    Demo,
    FourGroups,
    Pattern,
    RichSimple,
    Nested,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a corpus file and report per-record validation issues.
    Validate {
        corpus: PathBuf,
        /// Any validation issue fails the run.
        #[arg(long)]
        strict: bool,
    },
    /// Corpus statistics: per-family breakdown, word statistics, lengths,
    /// and per-group statistics when a mapping is given.
    Stats {
        corpus: PathBuf,
        #[arg(long)]
        mapping: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also emit an SVG bar chart of word occurrences per family.
        #[arg(long)]
        charts: bool,
    },
    /// Train one group's language model and write a checkpoint.
    Train {
        corpus: PathBuf,
        #[arg(long)]
        mapping: PathBuf,
        /// Group name from the mapping.
        #[arg(long)]
        group: String,
        #[arg(long, value_enum, default_value = "nlm")]
        backend: BackendArg,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a checkpoint's perplexity on a corpus (or one group).
    Ppl {
        corpus: PathBuf,
        /// Checkpoint manifest (.json) written by `train`.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        mapping: Option<PathBuf>,
        #[arg(long)]
        group: Option<String>,
    },
    /// Pairwise PLD/PLR matrices over all groups of a mapping.
    Distance {
        corpus: PathBuf,
        #[arg(long)]
        mapping: PathBuf,
        #[arg(long, value_enum, default_value = "ngram")]
        backend: BackendArg,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Parallel per-group trainings (0 = sequential).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract document states under a neural checkpoint and project them
    /// to 2-d with t-SNE.
    Project {
        corpus: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        mapping: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// t-SNE perplexity parameter.
        #[arg(long)]
        perplexity: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Deterministic synthetic corpora for tests and demos.
    Fixtures {
        #[command(subcommand)]
        command: FixturesCommand,
    },
}

#[derive(Debug, Subcommand)]
enum FixturesCommand {
    /// Write a synthetic corpus (and its group mapping) to a directory.
    Generate {
        #[arg(long, value_enum)]
        kind: FixtureKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version requests are not failures
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Validate { corpus, strict } => commands::validate(&corpus, strict),
        Command::Stats {
            corpus,
            mapping,
            out,
            charts,
        } => commands::stats(&corpus, mapping.as_deref(), &out, charts),
        Command::Train {
            corpus,
            mapping,
            group,
            backend,
            config,
            seed,
            out,
        } => commands::train(
            &corpus,
            &mapping,
            &group,
            backend.into(),
            config.as_deref(),
            seed,
            &out,
        ),
        Command::Ppl {
            corpus,
            model,
            mapping,
            group,
        } => commands::ppl(&corpus, &model, mapping.as_deref(), group.as_deref()),
        Command::Distance {
            corpus,
            mapping,
            backend,
            config,
            seed,
            jobs,
            out,
        } => commands::distance(
            &corpus,
            &mapping,
            backend.into(),
            config.as_deref(),
            seed,
            jobs,
            &out,
        ),
        Command::Project {
            corpus,
            model,
            mapping,
            config,
            perplexity,
            iterations,
            seed,
            out,
        } => commands::project(
            &corpus,
            &model,
            mapping.as_deref(),
            config.as_deref(),
            perplexity,
            iterations,
            seed,
            &out,
        ),
        Command::Fixtures {
            command: FixturesCommand::Generate { kind, out, seed },
        } => commands::fixtures_generate(kind, &out, seed),
    };
    match result {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {}", e.message);
            std::process::exit(e.code);
        }
    }
}

/// Stable exit-code contract: 0 success, 1 usage or validation failure,
/// 2 I/O failure.
pub struct CmdError {
    pub code: i32,
    pub message: String,
}

impl CmdError {
    pub fn usage(message: impl Into<String>) -> Self {
        CmdError {
            code: 1,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CmdError {
            code: 2,
            message: message.into(),
        }
    }
}

pub type CmdResult = Result<(), CmdError>;
