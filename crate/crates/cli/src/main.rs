//! `topicstab` command-line interface.
//!
//! Exit codes: 0 success, 1 usage/configuration error, 2 data error,
//! 3 numeric failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{apply_file, RunConfig};

#[derive(Parser)]
#[command(
    name = "topicstab",
    version,
    about = "Fit LDA and PCA topic models on word-document matrices and \
             measure their stability, coherence, and reliability"
)]
struct Cli {
    /// Configuration file (flat `section.key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

/// Flag overrides; each one wins over the config file and the defaults.
#[derive(Args, Debug, Default)]
struct Overrides {
    /// CSV input file.
    #[arg(long, global = true)]
    input_csv: Option<PathBuf>,
    /// Header name of the text column in the CSV input.
    #[arg(long, global = true)]
    input_column: Option<String>,
    /// Directory of .txt files, one document each.
    #[arg(long, global = true)]
    input_dir: Option<PathBuf>,
    /// Stop-word list file (one word per line, # comments).
    #[arg(long, global = true)]
    stopwords: Option<PathBuf>,
    /// Exclusion list file applied to stems.
    #[arg(long, global = true)]
    exclusions: Option<PathBuf>,
    /// Keep stems occurring strictly more often than this.
    #[arg(long, global = true)]
    min_occurrences: Option<u64>,
    /// Number of topics/factors for fit commands.
    #[arg(long, global = true)]
    n_topics: Option<usize>,
    /// alpha convention: 50-over-texts, 50-over-topics, or fixed.
    #[arg(long, global = true)]
    alpha_mode: Option<String>,
    /// Numeric alpha (implies alpha_mode=fixed).
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    burn_in: Option<usize>,
    #[arg(long, global = true)]
    iterations: Option<usize>,
    #[arg(long, global = true)]
    thinning: Option<usize>,
    /// Gibbs-sampling seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// phi/theta estimate: thinned-mean or last-sample.
    #[arg(long, global = true)]
    estimate: Option<String>,
    /// Factor count for fit-pca, or "kaiser".
    #[arg(long, global = true)]
    pca_k: Option<String>,
    /// Loading rank for PCA top words: signed or absolute.
    #[arg(long, global = true)]
    pca_rank: Option<String>,
    /// Cosine edge threshold for cowords.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Louvain resolution.
    #[arg(long, global = true)]
    resolution: Option<f64>,
    /// Ablation removal-pool size.
    #[arg(long, global = true)]
    pool_size: Option<usize>,
    /// Ablation step size.
    #[arg(long, global = true)]
    step: Option<usize>,
    /// Seed for drawing the removal pool.
    #[arg(long, global = true)]
    selection_seed: Option<u64>,
    /// Comma-separated list of topic counts for experiments.
    #[arg(long, global = true)]
    k_values: Option<String>,
    /// Top-word list length S.
    #[arg(long, global = true)]
    top_words: Option<usize>,
    /// Comma-separated seeds for the reliability experiment.
    #[arg(long, global = true)]
    seeds: Option<String>,
    /// Reuse the reference vocabulary for reduced corpora.
    #[arg(long, global = true)]
    fixed_vocabulary: bool,
    /// Use a fresh seed per ablation level.
    #[arg(long, global = true)]
    fresh_seeds: bool,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the corpus and export the vocabulary and matrix.
    Ingest,
    /// Fit an LDA model and export phi, theta, and top words.
    FitLda,
    /// Fit a rotated factor model and export loadings, scree, and scores.
    FitPca,
    /// Build the cosine co-word graph and detect communities.
    Cowords,
    /// Run the corpus-ablation stability experiment.
    Stability,
    /// Sweep mean topic coherence over the number of topics.
    Coherence,
    /// Compare repeated LDA fits across seeds.
    Reliability,
    /// Compare two saved models (topSim both ways plus Cramér's V).
    Compare {
        model_a: PathBuf,
        model_b: PathBuf,
    },
}

/// Error wrapper that knows its exit code.
pub(crate) enum CliError {
    Usage(String),
    Core(topicstab::Error),
}

impl From<topicstab::Error> for CliError {
    fn from(e: topicstab::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Usage(e.0)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(topicstab::Error::Numeric(_)) => 3,
            CliError::Core(_) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles help/version as "errors" with successful exit.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = RunConfig::default();
    if let Some(path) = &cli.config {
        apply_file(&mut config, path)?;
    }
    apply_overrides(&mut config, &cli.overrides)?;
    config.validate()?;

    match cli.command {
        Command::Ingest => commands::ingest(&config),
        Command::FitLda => commands::fit_lda(&config),
        Command::FitPca => commands::fit_pca(&config),
        Command::Cowords => commands::cowords(&config),
        Command::Stability => commands::stability(&config),
        Command::Coherence => commands::coherence(&config),
        Command::Reliability => commands::reliability(&config),
        Command::Compare { model_a, model_b } => commands::compare(&config, &model_a, &model_b),
    }
}

fn apply_overrides(config: &mut RunConfig, o: &Overrides) -> Result<(), CliError> {
    let mut set = |key: &str, value: String| -> Result<(), CliError> {
        config.apply(key, &value).map_err(CliError::from)
    };
    if let Some(v) = &o.input_csv {
        set("input.csv", v.display().to_string())?;
    }
    if let Some(v) = &o.input_column {
        set("input.column", v.clone())?;
    }
    if let Some(v) = &o.input_dir {
        set("input.dir", v.display().to_string())?;
    }
    if let Some(v) = &o.stopwords {
        set("preprocess.stopwords", v.display().to_string())?;
    }
    if let Some(v) = &o.exclusions {
        set("preprocess.exclusions", v.display().to_string())?;
    }
    if let Some(v) = o.min_occurrences {
        set("preprocess.min_occurrences", v.to_string())?;
    }
    if let Some(v) = o.n_topics {
        set("lda.k", v.to_string())?;
        set("pca.k", v.to_string())?;
    }
    if let Some(v) = &o.alpha_mode {
        set("lda.alpha_mode", v.clone())?;
    }
    if let Some(v) = o.alpha {
        set("lda.alpha", v.to_string())?;
    }
    if let Some(v) = o.beta {
        set("lda.beta", v.to_string())?;
    }
    if let Some(v) = o.burn_in {
        set("lda.burn_in", v.to_string())?;
    }
    if let Some(v) = o.iterations {
        set("lda.iterations", v.to_string())?;
    }
    if let Some(v) = o.thinning {
        set("lda.thinning", v.to_string())?;
    }
    if let Some(v) = o.seed {
        set("lda.seed", v.to_string())?;
    }
    if let Some(v) = &o.estimate {
        set("lda.estimate", v.clone())?;
    }
    if let Some(v) = &o.pca_k {
        set("pca.k", v.clone())?;
    }
    if let Some(v) = &o.pca_rank {
        set("pca.rank", v.clone())?;
    }
    if let Some(v) = o.threshold {
        set("cooccur.threshold", v.to_string())?;
    }
    if let Some(v) = o.resolution {
        set("cooccur.resolution", v.to_string())?;
    }
    if let Some(v) = o.pool_size {
        set("experiment.pool_size", v.to_string())?;
    }
    if let Some(v) = o.step {
        set("experiment.step", v.to_string())?;
    }
    if let Some(v) = o.selection_seed {
        set("experiment.selection_seed", v.to_string())?;
    }
    if let Some(v) = &o.k_values {
        set("experiment.k_values", v.clone())?;
    }
    if let Some(v) = o.top_words {
        set("experiment.top_words", v.to_string())?;
    }
    if let Some(v) = &o.seeds {
        set("experiment.seeds", v.clone())?;
    }
    if o.fixed_vocabulary {
        set("experiment.fixed_vocabulary", "true".to_string())?;
    }
    if o.fresh_seeds {
        set("experiment.fresh_seeds", "true".to_string())?;
    }
    if let Some(v) = &o.out {
        set("output.dir", v.display().to_string())?;
    }
    Ok(())
}
