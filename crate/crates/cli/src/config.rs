//! Run configuration: flat `section.key=value` files plus flag overrides.
//! Flags override file values, file values override defaults. Unknown keys
//! are errors; `meta.*` keys are accepted and ignored so an emitted manifest
//! can be re-ingested as a configuration.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use topicstab::corpus::{load_word_list, parse_word_list, PreprocessOptions, DEFAULT_STOPWORDS};
use topicstab::experiments::{FitSettings, Manifest, Method};
use topicstab::lda::{AlphaMode, EstimateMode, LdaConfig};
use topicstab::metrics::CoherencePairs;
use topicstab::pca::LoadingRank;

/// A configuration problem: wrong key, wrong type, contradictory values.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type ConfigResult<T> = Result<T, ConfigError>;

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Input source: exactly one must be set for corpus-consuming commands.
#[derive(Debug, Clone, Default)]
pub struct InputSpec {
    pub csv: Option<PathBuf>,
    pub column: Option<String>,
    pub dir: Option<PathBuf>,
}

/// Fully resolved run configuration with every documented default applied.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: InputSpec,
    pub stopwords_file: Option<PathBuf>,
    pub exclusions_file: Option<PathBuf>,
    pub min_occurrences: u64,

    pub lda_k: usize,
    pub alpha_mode: AlphaMode<f64>,
    pub beta: f64,
    pub burn_in: usize,
    pub iterations: usize,
    pub thinning: usize,
    pub seed: u64,
    pub estimate: EstimateMode,

    /// None selects the Kaiser criterion.
    pub pca_k: Option<usize>,
    pub pca_rank: LoadingRank,

    pub cooccur_threshold: f64,
    pub cooccur_resolution: f64,

    pub pool_size: usize,
    pub step: usize,
    pub selection_seed: u64,
    pub k_values: Vec<usize>,
    pub top_words: usize,
    pub seeds: Vec<u64>,
    pub fixed_vocabulary: bool,
    pub fresh_seeds: bool,
    pub coherence_pairs: CoherencePairs,

    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: InputSpec::default(),
            stopwords_file: None,
            exclusions_file: None,
            min_occurrences: 100,
            lda_k: 8,
            alpha_mode: AlphaMode::FiftyOverTexts,
            beta: 0.01,
            burn_in: 40,
            iterations: 1500,
            thinning: 50,
            seed: 42,
            estimate: EstimateMode::ThinnedMean,
            pca_k: None,
            pca_rank: LoadingRank::Signed,
            cooccur_threshold: 0.0,
            cooccur_resolution: 1.0,
            pool_size: 1000,
            step: 50,
            selection_seed: 42,
            k_values: vec![4, 8, 16],
            top_words: 10,
            seeds: vec![1, 2, 3, 4, 5],
            fixed_vocabulary: false,
            fresh_seeds: false,
            coherence_pairs: CoherencePairs::Ordered,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    /// Apply one `section.key = value` assignment.
    pub fn apply(&mut self, key: &str, value: &str) -> ConfigResult<()> {
        match key {
            "input.csv" => self.input.csv = Some(PathBuf::from(value)),
            "input.column" => self.input.column = Some(value.to_string()),
            "input.dir" => self.input.dir = Some(PathBuf::from(value)),
            "preprocess.stopwords" => self.stopwords_file = Some(PathBuf::from(value)),
            "preprocess.exclusions" => self.exclusions_file = Some(PathBuf::from(value)),
            "preprocess.min_occurrences" => self.min_occurrences = parse_num(key, value)?,
            "lda.k" => self.lda_k = parse_num(key, value)?,
            "lda.alpha_mode" => {
                self.alpha_mode = match value {
                    "50-over-texts" => AlphaMode::FiftyOverTexts,
                    "50-over-topics" => AlphaMode::FiftyOverTopics,
                    // Keep a numeric alpha that was applied earlier; the
                    // NaN placeholder is caught by validate() when no
                    // lda.alpha ever arrives.
                    "fixed" => match self.alpha_mode {
                        AlphaMode::Fixed(a) => AlphaMode::Fixed(a),
                        _ => AlphaMode::Fixed(f64::NAN),
                    },
                    other => {
                        return Err(err(format!(
                            "lda.alpha_mode: unknown mode {other:?} \
                             (expected 50-over-texts, 50-over-topics, or fixed)"
                        )))
                    }
                }
            }
            "lda.alpha" => self.alpha_mode = AlphaMode::Fixed(parse_num(key, value)?),
            "lda.beta" => self.beta = parse_num(key, value)?,
            "lda.burn_in" => self.burn_in = parse_num(key, value)?,
            "lda.iterations" => self.iterations = parse_num(key, value)?,
            "lda.thinning" => self.thinning = parse_num(key, value)?,
            "lda.seed" => self.seed = parse_num(key, value)?,
            "lda.estimate" => {
                self.estimate = match value {
                    "thinned-mean" => EstimateMode::ThinnedMean,
                    "last-sample" => EstimateMode::LastSample,
                    other => {
                        return Err(err(format!(
                            "lda.estimate: unknown mode {other:?} \
                             (expected thinned-mean or last-sample)"
                        )))
                    }
                }
            }
            "pca.k" => {
                self.pca_k = if value == "kaiser" {
                    None
                } else {
                    Some(parse_num(key, value)?)
                }
            }
            "pca.rank" => {
                self.pca_rank = match value {
                    "signed" => LoadingRank::Signed,
                    "absolute" => LoadingRank::Absolute,
                    other => {
                        return Err(err(format!(
                            "pca.rank: unknown ranking {other:?} (expected signed or absolute)"
                        )))
                    }
                }
            }
            "cooccur.threshold" => self.cooccur_threshold = parse_num(key, value)?,
            "cooccur.resolution" => self.cooccur_resolution = parse_num(key, value)?,
            "experiment.pool_size" => self.pool_size = parse_num(key, value)?,
            "experiment.step" => self.step = parse_num(key, value)?,
            "experiment.selection_seed" => self.selection_seed = parse_num(key, value)?,
            "experiment.k_values" => self.k_values = parse_list(key, value)?,
            "experiment.top_words" => self.top_words = parse_num(key, value)?,
            "experiment.seeds" => self.seeds = parse_list(key, value)?,
            "experiment.fixed_vocabulary" => self.fixed_vocabulary = parse_bool(key, value)?,
            "experiment.fresh_seeds" => self.fresh_seeds = parse_bool(key, value)?,
            "experiment.coherence_pairs" => {
                self.coherence_pairs = match value {
                    "ordered" => CoherencePairs::Ordered,
                    "both-orders" => CoherencePairs::BothOrders,
                    other => {
                        return Err(err(format!(
                            "experiment.coherence_pairs: unknown mode {other:?} \
                             (expected ordered or both-orders)"
                        )))
                    }
                }
            }
            "output.dir" => self.out_dir = PathBuf::from(value),
            _ if key.starts_with("meta.")
                || key.starts_with("model.")
                || key.starts_with("cooccur.n_")
                || key == "cooccur.modularity"
                || key == "experiment.kind"
                || key == "experiment.methods"
                || key == "experiment.k"
                || key == "pca.seed" =>
            {
                // Manifest bookkeeping keys: accepted so a manifest round-trips.
            }
            _ => return Err(err(format!("unknown configuration key {key:?}"))),
        }
        Ok(())
    }

    /// Validate cross-field constraints.
    pub fn validate(&self) -> ConfigResult<()> {
        if self.input.csv.is_some() && self.input.dir.is_some() {
            return Err(err(
                "contradictory input: both input.csv and input.dir are set",
            ));
        }
        if self.input.csv.is_some() && self.input.column.is_none() {
            return Err(err("input.csv requires input.column"));
        }
        if let AlphaMode::Fixed(a) = self.alpha_mode {
            if !a.is_finite() || a <= 0.0 {
                return Err(err("lda.alpha_mode=fixed requires a positive lda.alpha"));
            }
        }
        if self.burn_in >= self.iterations {
            return Err(err("lda.burn_in must be smaller than lda.iterations"));
        }
        if self.thinning == 0 {
            return Err(err("lda.thinning must be at least 1"));
        }
        if self.k_values.is_empty() {
            return Err(err("experiment.k_values must not be empty"));
        }
        if self.top_words == 0 {
            return Err(err("experiment.top_words must be at least 1"));
        }
        Ok(())
    }

    /// Build the preprocessing options, loading word lists from disk.
    pub fn preprocess_options(&self) -> topicstab::Result<PreprocessOptions> {
        let stopwords = match &self.stopwords_file {
            Some(path) => load_word_list(path)?,
            None => parse_word_list(DEFAULT_STOPWORDS),
        };
        let exclusions = match &self.exclusions_file {
            Some(path) => load_word_list(path)?,
            None => HashSet::new(),
        };
        Ok(PreprocessOptions {
            stopwords,
            exclusions,
            min_occurrences: self.min_occurrences,
        })
    }

    pub fn lda_config(&self) -> LdaConfig<f64> {
        LdaConfig {
            n_topics: self.lda_k,
            alpha: self.alpha_mode,
            beta: self.beta,
            burn_in: self.burn_in,
            iterations: self.iterations,
            thinning: self.thinning,
            seed: self.seed,
            estimate: self.estimate,
        }
    }

    pub fn fit_settings(&self) -> FitSettings {
        FitSettings {
            lda: self.lda_config(),
            pca_rank: self.pca_rank,
            top_words: self.top_words,
        }
    }

    /// Echo the full resolved configuration into a manifest.
    pub fn manifest(&self) -> Manifest {
        let mut m = Manifest::default();
        if let Some(csv) = &self.input.csv {
            m.set("input.csv", csv.display());
        }
        if let Some(column) = &self.input.column {
            m.set("input.column", column);
        }
        if let Some(dir) = &self.input.dir {
            m.set("input.dir", dir.display());
        }
        if let Some(path) = &self.stopwords_file {
            m.set("preprocess.stopwords", path.display());
        }
        if let Some(path) = &self.exclusions_file {
            m.set("preprocess.exclusions", path.display());
        }
        m.set("preprocess.min_occurrences", self.min_occurrences);
        m.set("lda.k", self.lda_k);
        match self.alpha_mode {
            AlphaMode::FiftyOverTexts => m.set("lda.alpha_mode", "50-over-texts"),
            AlphaMode::FiftyOverTopics => m.set("lda.alpha_mode", "50-over-topics"),
            AlphaMode::Fixed(a) => {
                m.set("lda.alpha_mode", "fixed");
                m.set("lda.alpha", a);
            }
        }
        m.set("lda.beta", self.beta);
        m.set("lda.burn_in", self.burn_in);
        m.set("lda.iterations", self.iterations);
        m.set("lda.thinning", self.thinning);
        m.set("lda.seed", self.seed);
        m.set(
            "lda.estimate",
            match self.estimate {
                EstimateMode::ThinnedMean => "thinned-mean",
                EstimateMode::LastSample => "last-sample",
            },
        );
        match self.pca_k {
            Some(k) => m.set("pca.k", k),
            None => m.set("pca.k", "kaiser"),
        }
        m.set(
            "pca.rank",
            match self.pca_rank {
                LoadingRank::Signed => "signed",
                LoadingRank::Absolute => "absolute",
            },
        );
        m.set("cooccur.threshold", self.cooccur_threshold);
        m.set("cooccur.resolution", self.cooccur_resolution);
        m.set("experiment.pool_size", self.pool_size);
        m.set("experiment.step", self.step);
        m.set("experiment.selection_seed", self.selection_seed);
        m.set(
            "experiment.k_values",
            self.k_values
                .iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        m.set("experiment.top_words", self.top_words);
        m.set(
            "experiment.seeds",
            self.seeds
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        m.set("experiment.fixed_vocabulary", self.fixed_vocabulary);
        m.set("experiment.fresh_seeds", self.fresh_seeds);
        m.set(
            "experiment.coherence_pairs",
            match self.coherence_pairs {
                CoherencePairs::Ordered => "ordered",
                CoherencePairs::BothOrders => "both-orders",
            },
        );
        m.set("output.dir", self.out_dir.display());
        m
    }

    pub fn methods(&self) -> Vec<Method> {
        vec![Method::Lda, Method::Pca]
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> ConfigResult<T> {
    value
        .parse()
        .map_err(|_| err(format!("{key}: cannot parse {value:?}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> ConfigResult<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| err(format!("{key}: cannot parse list entry {s:?}")))
        })
        .collect()
}

fn parse_bool(key: &str, value: &str) -> ConfigResult<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(err(format!("{key}: cannot parse {value:?} as a boolean"))),
    }
}

/// Parse a config file body: `key = value` lines, `#` comments.
pub fn apply_file(config: &mut RunConfig, path: &Path) -> ConfigResult<()> {
    let body = std::fs::read_to_string(path)
        .map_err(|e| err(format!("cannot read config {}: {e}", path.display())))?;
    for (number, line) in body.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("line {}: expected key=value", number + 1)))?;
        config.apply(key.trim(), value.trim())?;
    }
    Ok(())
}
