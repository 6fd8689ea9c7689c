//! Experiment orchestration: ablation stability series, coherence sweeps
//! over the number of topics, and run-to-run seed reliability, plus the CSV,
//! SVG, and manifest emission behind them.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chart::{line_chart, Series};
use crate::cooccur::{cosine_matrix, louvain};
use crate::corpus::{doc_frequencies, write_file, Corpus};
use crate::error::{Error, Result};
use crate::lda::{fit_lda, top_words, word_assignment_lda, LdaConfig, RNG_NAME};
use crate::metrics::{cramers_v, mean_coherence, top_sim_between, CoherencePairs};
use crate::pca::{factor_top_words, fit_pca, LoadingRank};
use crate::topics::TopicTopWords;

/// Which model family a report row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Lda,
    Pca,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Lda => write!(f, "lda"),
            Method::Pca => write!(f, "pca"),
        }
    }
}

/// Flat, ordered key/value run manifest; the same format the configuration
/// files use, so a manifest can be re-ingested to reproduce a run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest(pub BTreeMap<String, String>);

impl Manifest {
    pub fn set(&mut self, key: &str, value: impl fmt::Display) {
        self.0.insert(key.to_string(), value.to_string());
    }

    pub fn merge(&mut self, other: &Manifest) {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), v.clone());
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.0 {
            out.push_str(&format!("{k}={v}\n"));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, self.render().as_bytes())
    }
}

/// The removal pool and nesting structure of an ablation series.
#[derive(Debug, Clone)]
pub struct AblationPlan {
    /// Ordered removal pool of document ids, sampled without replacement.
    pub pool: Vec<usize>,
    pub step: usize,
    pub seed: u64,
    /// Whether the reduced corpora reuse the reference vocabulary instead
    /// of rebuilding it. topSim interpretation depends on this.
    pub fixed_vocabulary: bool,
}

impl AblationPlan {
    pub fn n_levels(&self) -> usize {
        self.pool.len() / self.step
    }

    /// Documents removed at 1-based level `level` (the first `level * step`
    /// pool members).
    pub fn removal_prefix(&self, level: usize) -> &[usize] {
        &self.pool[..level * self.step]
    }

    /// Removal count at 1-based level `level`.
    pub fn removal_size(&self, level: usize) -> usize {
        level * self.step
    }
}

/// Draw the removal pool and build the nested reduced corpora. Level i
/// removes the first `i * step` pool members; by default the vocabulary is
/// rebuilt per reduced corpus.
pub fn make_ablation_series(
    corpus: &Corpus,
    pool_size: usize,
    step: usize,
    seed: u64,
    fixed_vocabulary: bool,
) -> Result<(AblationPlan, Vec<Corpus>)> {
    if step == 0 {
        return Err(Error::input("ablation step must be positive"));
    }
    if pool_size > corpus.n_docs() {
        return Err(Error::input(format!(
            "removal pool of {pool_size} exceeds the corpus size {}",
            corpus.n_docs()
        )));
    }
    if !pool_size.is_multiple_of(step) {
        return Err(Error::input("step must divide pool_size"));
    }

    // Partial Fisher-Yates over the sorted document ids.
    let mut ids: Vec<usize> = corpus.documents.iter().map(|d| d.id).collect();
    ids.sort_unstable();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..pool_size {
        let j = rng.gen_range(i..ids.len());
        ids.swap(i, j);
    }
    ids.truncate(pool_size);
    let plan = AblationPlan {
        pool: ids,
        step,
        seed,
        fixed_vocabulary,
    };

    let mut reduced = Vec::with_capacity(plan.n_levels());
    for level in 1..=plan.n_levels() {
        let removed = plan.removal_prefix(level);
        let corpus = if fixed_vocabulary {
            corpus.remove_documents_fixed_vocabulary(removed)?
        } else {
            corpus.remove_documents(removed)?
        };
        reduced.push(corpus);
    }
    Ok((plan, reduced))
}

/// Shared fit settings for the experiment grid.
#[derive(Debug, Clone)]
pub struct FitSettings {
    /// LDA template; `n_topics` is overridden per grid cell.
    pub lda: LdaConfig<f64>,
    /// Ranking used for PCA top-word lists.
    pub pca_rank: LoadingRank,
    /// Top-word list length S.
    pub top_words: usize,
}

impl Default for FitSettings {
    fn default() -> Self {
        FitSettings {
            lda: LdaConfig::default(),
            pca_rank: LoadingRank::Signed,
            top_words: 10,
        }
    }
}

impl FitSettings {
    /// Fit one model family at one k and return its top-word lists.
    fn fit_top_words(
        &self,
        corpus: &Corpus,
        method: Method,
        k: usize,
        seed: u64,
    ) -> Result<TopicTopWords> {
        match method {
            Method::Lda => {
                let config = self.lda.clone().with_topics(k).with_seed(seed);
                let model = fit_lda(&corpus.matrix, &config)?;
                top_words(&model, &corpus.vocabulary.words, self.top_words)
            }
            Method::Pca => {
                let model = fit_pca::<f64>(&corpus.matrix, Some(k))?;
                factor_top_words(
                    &model,
                    &corpus.vocabulary.words,
                    self.top_words,
                    self.pca_rank,
                )
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct StabilityRow {
    pub method: Method,
    pub n_topics: usize,
    /// Number of documents removed.
    pub removal_level: usize,
    pub top_sim: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct StabilityAggregate {
    pub method: Method,
    pub n_topics: usize,
    pub min: Option<f64>,
    pub mean: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
    pub aggregates: Vec<StabilityAggregate>,
    pub manifest: Manifest,
}

#[derive(Debug, Clone)]
pub struct StabilityConfig {
    pub methods: Vec<Method>,
    pub k_values: Vec<usize>,
    pub settings: FitSettings,
    /// Refit reduced corpora with fresh per-level seeds instead of reusing
    /// the reference seed.
    pub fresh_seeds: bool,
}

/// Seed used for the reduced fit at 1-based `level`.
fn level_seed(base: u64, level: usize, fresh: bool) -> u64 {
    if fresh {
        base.wrapping_add(level as u64)
    } else {
        base
    }
}

/// Fit a reference model per (method, k) on the full corpus, refit on every
/// reduced corpus, and score each against the reference with topSim.
pub fn run_stability(
    corpus: &Corpus,
    plan: &AblationPlan,
    reduced: &[Corpus],
    config: &StabilityConfig,
) -> StabilityReport {
    assert_eq!(plan.n_levels(), reduced.len());
    let mut rows = Vec::new();
    let mut aggregates = Vec::new();

    for &method in &config.methods {
        for &k in &config.k_values {
            let reference =
                config
                    .settings
                    .fit_top_words(corpus, method, k, config.settings.lda.seed);
            let mut values = Vec::new();
            for (i, reduced_corpus) in reduced.iter().enumerate() {
                let level = i + 1;
                let removal_level = plan.removal_size(level);
                let cell = reference.as_ref().map_err(|e| e.to_string()).and_then(|ref_top| {
                    let seed = level_seed(config.settings.lda.seed, level, config.fresh_seeds);
                    config
                        .settings
                        .fit_top_words(reduced_corpus, method, k, seed)
                        .and_then(|test_top| top_sim_between::<f64>(&test_top, ref_top))
                        .map_err(|e| e.to_string())
                });
                match cell {
                    Ok(value) => {
                        values.push(value);
                        rows.push(StabilityRow {
                            method,
                            n_topics: k,
                            removal_level,
                            top_sim: Some(value),
                            error: None,
                        });
                    }
                    Err(message) => rows.push(StabilityRow {
                        method,
                        n_topics: k,
                        removal_level,
                        top_sim: None,
                        error: Some(message),
                    }),
                }
            }
            let aggregate = if values.is_empty() {
                StabilityAggregate {
                    method,
                    n_topics: k,
                    min: None,
                    mean: None,
                    max: None,
                }
            } else {
                let min = values.iter().copied().fold(f64::INFINITY, f64::min);
                let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mean = values.iter().sum::<f64>() / values.len() as f64;
                StabilityAggregate {
                    method,
                    n_topics: k,
                    min: Some(min),
                    mean: Some(mean),
                    max: Some(max),
                }
            };
            aggregates.push(aggregate);
        }
    }

    let mut manifest = base_manifest(corpus, &config.settings);
    manifest.set("experiment.kind", "stability");
    manifest.set("experiment.pool_size", plan.pool.len());
    manifest.set("experiment.step", plan.step);
    manifest.set("experiment.selection_seed", plan.seed);
    manifest.set("experiment.fixed_vocabulary", plan.fixed_vocabulary);
    manifest.set("experiment.fresh_seeds", config.fresh_seeds);
    manifest.set("experiment.k_values", join(&config.k_values));
    manifest.set(
        "experiment.methods",
        config
            .methods
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    StabilityReport {
        rows,
        aggregates,
        manifest,
    }
}

#[derive(Debug, Clone)]
pub struct CoherenceRow {
    pub method: Method,
    pub n_topics: usize,
    pub mean_coherence: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct CoherenceReport {
    pub rows: Vec<CoherenceRow>,
    pub manifest: Manifest,
}

#[derive(Debug, Clone)]
pub struct CoherenceConfig {
    pub methods: Vec<Method>,
    pub k_values: Vec<usize>,
    pub settings: FitSettings,
    pub pairs: CoherencePairs,
}

/// One fit per (method, k); mean coherence of the top-S lists against the
/// full-corpus document frequencies.
pub fn run_coherence_sweep(corpus: &Corpus, config: &CoherenceConfig) -> CoherenceReport {
    // Fit everything first, then index only the words the lists need.
    let mut fits: Vec<(Method, usize, std::result::Result<TopicTopWords, String>)> = Vec::new();
    for &method in &config.methods {
        for &k in &config.k_values {
            let top = config
                .settings
                .fit_top_words(corpus, method, k, config.settings.lda.seed)
                .map_err(|e| e.to_string());
            fits.push((method, k, top));
        }
    }

    let mut needed: HashSet<usize> = HashSet::new();
    for (_, _, fit) in &fits {
        if let Ok(top) = fit {
            for topic in &top.topics {
                for word in topic {
                    if let Some(idx) = corpus.vocabulary.position(word) {
                        needed.insert(idx);
                    }
                }
            }
        }
    }
    let dfi = doc_frequencies(&corpus.matrix, Some(&needed));
    let lookup = |w: &str| corpus.vocabulary.position(w);

    let rows = fits
        .into_iter()
        .map(|(method, k, fit)| {
            let outcome = fit.and_then(|top| {
                mean_coherence::<f64>(&top, &dfi, &lookup, config.pairs).map_err(|e| e.to_string())
            });
            match outcome {
                Ok(value) => CoherenceRow {
                    method,
                    n_topics: k,
                    mean_coherence: Some(value),
                    error: None,
                },
                Err(message) => CoherenceRow {
                    method,
                    n_topics: k,
                    mean_coherence: None,
                    error: Some(message),
                },
            }
        })
        .collect();

    let mut manifest = base_manifest(corpus, &config.settings);
    manifest.set("experiment.kind", "coherence");
    manifest.set("experiment.k_values", join(&config.k_values));
    manifest.set(
        "experiment.coherence_pairs",
        match config.pairs {
            CoherencePairs::Ordered => "ordered",
            CoherencePairs::BothOrders => "both-orders",
        },
    );
    CoherenceReport { rows, manifest }
}

#[derive(Debug, Clone)]
pub struct ReliabilityRow {
    pub seed_a: u64,
    pub seed_b: u64,
    pub cramers_v: f64,
    pub chi2: f64,
    pub df: usize,
    pub p: f64,
    /// topSim with the later seed's model as the test side.
    pub top_sim: f64,
}

#[derive(Debug, Clone)]
pub struct ReliabilityReport {
    pub k: usize,
    pub rows: Vec<ReliabilityRow>,
    pub manifest: Manifest,
}

#[derive(Debug, Clone)]
pub struct ReliabilityConfig {
    pub k: usize,
    pub seeds: Vec<u64>,
    pub settings: FitSettings,
}

/// Fit one LDA model per seed and compare every unordered pair of runs with
/// Cramér's V over the word assignments, plus topSim over the top-S lists.
pub fn run_seed_reliability(corpus: &Corpus, config: &ReliabilityConfig) -> Result<ReliabilityReport> {
    if config.seeds.len() < 2 {
        return Err(Error::input("seed reliability needs at least two seeds"));
    }
    let mut fitted = Vec::with_capacity(config.seeds.len());
    for &seed in &config.seeds {
        let lda_config = config.settings.lda.clone().with_topics(config.k).with_seed(seed);
        let model = fit_lda(&corpus.matrix, &lda_config)?;
        let assignment = word_assignment_lda(&model, &corpus.vocabulary.words);
        let top = top_words(&model, &corpus.vocabulary.words, config.settings.top_words)?;
        fitted.push((seed, assignment, top));
    }

    let mut rows = Vec::new();
    for i in 0..fitted.len() {
        for j in (i + 1)..fitted.len() {
            let (seed_a, ref assign_a, ref top_a) = fitted[i];
            let (seed_b, ref assign_b, ref top_b) = fitted[j];
            let association = cramers_v::<f64>(assign_a, assign_b)?;
            let sim = top_sim_between::<f64>(top_b, top_a)?;
            rows.push(ReliabilityRow {
                seed_a,
                seed_b,
                cramers_v: association.v,
                chi2: association.chi2,
                df: association.df,
                p: association.p,
                top_sim: sim,
            });
        }
    }

    let mut manifest = base_manifest(corpus, &config.settings);
    manifest.set("experiment.kind", "reliability");
    manifest.set("experiment.k", config.k);
    manifest.set(
        "experiment.seeds",
        config
            .seeds
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    Ok(ReliabilityReport {
        k: config.k,
        rows,
        manifest,
    })
}

fn base_manifest(corpus: &Corpus, settings: &FitSettings) -> Manifest {
    let mut manifest = Manifest::default();
    manifest.set("meta.version", env!("CARGO_PKG_VERSION"));
    manifest.set("meta.rng", RNG_NAME);
    manifest.set("meta.corpus_fingerprint", format!("{:016x}", corpus.fingerprint()));
    manifest.set("meta.n_docs", corpus.n_docs());
    manifest.set("meta.vocabulary_size", corpus.vocabulary.len());
    manifest.set("preprocess.min_occurrences", corpus.options.min_occurrences);
    manifest.set("experiment.top_words", settings.top_words);
    manifest.set("pca.seed", "n/a"); // the factor path is deterministic
    manifest.set("lda.seed", settings.lda.seed);
    manifest.set("lda.beta", settings.lda.beta);
    manifest.set("lda.burn_in", settings.lda.burn_in);
    manifest.set("lda.iterations", settings.lda.iterations);
    manifest.set("lda.thinning", settings.lda.thinning);
    let (alpha_mode, alpha_note) = match settings.lda.alpha {
        crate::lda::AlphaMode::FiftyOverTexts => {
            ("50-over-texts", Some("alpha uses the per-text convention"))
        }
        crate::lda::AlphaMode::FiftyOverTopics => ("50-over-topics", None),
        crate::lda::AlphaMode::Fixed(_) => ("fixed", None),
    };
    manifest.set("lda.alpha_mode", alpha_mode);
    if let crate::lda::AlphaMode::Fixed(a) = settings.lda.alpha {
        manifest.set("lda.alpha", a);
    }
    if let Some(note) = alpha_note {
        manifest.set("meta.alpha_note", note);
    }
    manifest.set(
        "pca.rank",
        match settings.pca_rank {
            LoadingRank::Signed => "signed",
            LoadingRank::Absolute => "absolute",
        },
    );
    manifest
}

fn join(values: &[usize]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write `stability.csv`, `stability_summary.csv`, `errors.csv`, the figure
/// analogs, and `manifest.txt` into `out_dir`.
pub fn emit_stability(report: &StabilityReport, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let mut csv = String::from("method,n_topics,removal_level,top_sim\n");
    let mut errors = String::from("method,n_topics,removal_level,error\n");
    for row in &report.rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            row.method,
            row.n_topics,
            row.removal_level,
            fmt_opt(row.top_sim)
        ));
        if let Some(err) = &row.error {
            errors.push_str(&format!(
                "{},{},{},{}\n",
                row.method,
                row.n_topics,
                row.removal_level,
                err.replace(',', ";")
            ));
        }
    }
    write_file(&out_dir.join("stability.csv"), csv.as_bytes())?;
    write_file(&out_dir.join("errors.csv"), errors.as_bytes())?;

    let mut summary = String::from("method,n_topics,min,mean,max\n");
    for agg in &report.aggregates {
        summary.push_str(&format!(
            "{},{},{},{},{}\n",
            agg.method,
            agg.n_topics,
            fmt_opt(agg.min),
            fmt_opt(agg.mean),
            fmt_opt(agg.max)
        ));
    }
    write_file(&out_dir.join("stability_summary.csv"), summary.as_bytes())?;

    // Figure-2 analog: one chart per method, topSim vs removal level, one
    // series per k.
    for method in [Method::Lda, Method::Pca] {
        let mut by_k: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
        for row in &report.rows {
            if row.method == method {
                if let Some(v) = row.top_sim {
                    by_k
                        .entry(row.n_topics)
                        .or_default()
                        .push((row.removal_level as f64, v));
                }
            }
        }
        if by_k.is_empty() {
            continue;
        }
        let series: Vec<Series> = by_k
            .into_iter()
            .map(|(k, points)| Series {
                label: format!("k={k}"),
                points,
            })
            .collect();
        let svg = line_chart(
            &format!("Similarity to reference model ({method})"),
            "documents removed",
            "topSim",
            &series,
        );
        write_file(&out_dir.join(format!("stability_{method}.svg")), svg.as_bytes())?;
    }

    // Figure-3 analog: min/mean/max vs k, one chart per method.
    for method in [Method::Lda, Method::Pca] {
        let aggs: Vec<&StabilityAggregate> = report
            .aggregates
            .iter()
            .filter(|a| a.method == method)
            .collect();
        if aggs.is_empty() {
            continue;
        }
        let pick = |f: fn(&StabilityAggregate) -> Option<f64>| -> Vec<(f64, f64)> {
            aggs.iter()
                .filter_map(|a| f(a).map(|v| (a.n_topics as f64, v)))
                .collect()
        };
        let series = vec![
            Series {
                label: "max".into(),
                points: pick(|a| a.max),
            },
            Series {
                label: "mean".into(),
                points: pick(|a| a.mean),
            },
            Series {
                label: "min".into(),
                points: pick(|a| a.min),
            },
        ];
        let svg = line_chart(
            &format!("topSim range across reduced samples ({method})"),
            "number of topics",
            "topSim",
            &series,
        );
        write_file(
            &out_dir.join(format!("stability_summary_{method}.svg")),
            svg.as_bytes(),
        )?;
    }

    report.manifest.write(&out_dir.join("manifest.txt"))
}

/// Write `coherence.csv`, `errors.csv`, `coherence.svg`, and `manifest.txt`.
pub fn emit_coherence(report: &CoherenceReport, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let mut csv = String::from("method,n_topics,mean_coherence\n");
    let mut errors = String::from("method,n_topics,error\n");
    for row in &report.rows {
        csv.push_str(&format!(
            "{},{},{}\n",
            row.method,
            row.n_topics,
            fmt_opt(row.mean_coherence)
        ));
        if let Some(err) = &row.error {
            errors.push_str(&format!(
                "{},{},{}\n",
                row.method,
                row.n_topics,
                err.replace(',', ";")
            ));
        }
    }
    write_file(&out_dir.join("coherence.csv"), csv.as_bytes())?;
    write_file(&out_dir.join("errors.csv"), errors.as_bytes())?;

    let mut by_method: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for row in &report.rows {
        if let Some(v) = row.mean_coherence {
            by_method
                .entry(row.method.to_string())
                .or_default()
                .push((row.n_topics as f64, v));
        }
    }
    let series: Vec<Series> = by_method
        .into_iter()
        .map(|(label, points)| Series { label, points })
        .collect();
    let svg = line_chart(
        "Average internal coherence",
        "number of topics",
        "mean coherence",
        &series,
    );
    write_file(&out_dir.join("coherence.svg"), svg.as_bytes())?;

    report.manifest.write(&out_dir.join("manifest.txt"))
}

/// Write `reliability.csv` and `manifest.txt`.
pub fn emit_reliability(report: &ReliabilityReport, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut csv = String::from("seed_a,seed_b,cramers_v,chi2,df,p,top_sim\n");
    for row in &report.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.seed_a, row.seed_b, row.cramers_v, row.chi2, row.df, row.p, row.top_sim
        ));
    }
    write_file(&out_dir.join("reliability.csv"), csv.as_bytes())?;
    report.manifest.write(&out_dir.join("manifest.txt"))
}

/// Build the co-word graph, detect communities, and export everything into
/// `out_dir` (graph.net, graph.communities.csv, manifest.txt). `extra`
/// entries are merged into the manifest.
pub fn run_cowords(
    corpus: &Corpus,
    threshold: f64,
    resolution: f64,
    out_dir: &Path,
    extra: Option<&Manifest>,
) -> Result<f64> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let graph = cosine_matrix::<f64>(&corpus.matrix, threshold);
    let partition = louvain(&graph, resolution);
    crate::cooccur::export_graph(
        &graph,
        &corpus.vocabulary.words,
        Some(&partition),
        &out_dir.join("graph.net"),
    )?;
    let mut manifest = Manifest::default();
    if let Some(extra) = extra {
        manifest.merge(extra);
    }
    manifest.set("meta.version", env!("CARGO_PKG_VERSION"));
    manifest.set("meta.corpus_fingerprint", format!("{:016x}", corpus.fingerprint()));
    manifest.set("cooccur.threshold", threshold);
    manifest.set("cooccur.resolution", resolution);
    manifest.set("cooccur.n_edges", graph.edges.len());
    manifest.set("cooccur.n_communities", partition.n_communities());
    manifest.set("cooccur.modularity", partition.q);
    manifest.write(&out_dir.join("manifest.txt"))?;
    Ok(partition.q)
}
