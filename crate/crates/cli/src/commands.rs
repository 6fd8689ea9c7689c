//! Subcommand implementations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use topicstab::cooccur::two_mode_export;
use topicstab::corpus::{
    export_matrix, export_vocabulary, ingest_csv, ingest_dir, write_file, Corpus,
};
use topicstab::experiments::{
    emit_coherence, emit_reliability, emit_stability, make_ablation_series, run_coherence_sweep,
    run_cowords, run_seed_reliability, run_stability, CoherenceConfig, Manifest,
    ReliabilityConfig, StabilityConfig,
};
use topicstab::lda::{export_phi, export_theta, fit_lda as lda_fit, top_words, word_assignment_lda};
use topicstab::metrics::{cramers_v, top_sim_between};
use topicstab::pca::{factor_scores, factor_top_words, fit_pca as pca_fit, word_assignment_pca, LoadingRank};
use topicstab::topics::{TopicTopWords, WordAssignment};

use crate::config::RunConfig;
use crate::CliError;

type CommandResult = Result<(), CliError>;

fn load_corpus(config: &RunConfig) -> Result<Corpus, CliError> {
    let options = config.preprocess_options()?;
    if let Some(csv) = &config.input.csv {
        let column = config
            .input
            .column
            .as_ref()
            .expect("validated: csv input has a column");
        let texts = ingest_csv(csv, column)?;
        Ok(Corpus::build(&texts, options))
    } else if let Some(dir) = &config.input.dir {
        let named = ingest_dir(dir)?;
        let (keys, texts): (Vec<String>, Vec<String>) = named.into_iter().unzip();
        Ok(Corpus::build_with_keys(&texts, &keys, options))
    } else {
        Err(CliError::Usage(
            "no input configured: set input.csv plus input.column, or input.dir".into(),
        ))
    }
}

fn ensure_out(config: &RunConfig) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&config.out_dir)
        .map_err(|e| CliError::Core(topicstab::Error::io(&config.out_dir, e)))?;
    Ok(config.out_dir.clone())
}

fn corpus_manifest(config: &RunConfig, corpus: &Corpus) -> Manifest {
    let mut manifest = config.manifest();
    manifest.set("meta.version", env!("CARGO_PKG_VERSION"));
    manifest.set("meta.rng", topicstab::lda::RNG_NAME);
    manifest.set(
        "meta.corpus_fingerprint",
        format!("{:016x}", corpus.fingerprint()),
    );
    manifest.set("meta.n_docs", corpus.n_docs());
    manifest.set("meta.vocabulary_size", corpus.vocabulary.len());
    manifest.set("meta.coverage", corpus.vocabulary.coverage);
    manifest.set("meta.zero_rows", corpus.matrix.zero_rows.len());
    manifest
}

pub fn ingest(config: &RunConfig) -> CommandResult {
    let corpus = load_corpus(config)?;
    let out = ensure_out(config)?;
    export_vocabulary(&corpus, &out.join("vocabulary.csv"))?;
    export_matrix(&corpus, &out.join("matrix.csv"))?;
    corpus_manifest(config, &corpus).write(&out.join("manifest.txt"))?;
    println!(
        "ingested {} documents, vocabulary {} ({}% of occurrences), {} empty rows",
        corpus.n_docs(),
        corpus.vocabulary.len(),
        (corpus.vocabulary.coverage * 1000.0).round() / 10.0,
        corpus.matrix.zero_rows.len()
    );
    Ok(())
}

fn export_top_words(top: &TopicTopWords, path: &Path) -> topicstab::Result<()> {
    let mut out = String::from("topic,rank,word\n");
    for (t, topic) in top.topics.iter().enumerate() {
        for (rank, word) in topic.iter().enumerate() {
            out.push_str(&format!("{t},{},{word}\n", rank + 1));
        }
    }
    write_file(path, out.as_bytes())
}

fn export_assignments(assignment: &WordAssignment, path: &Path) -> topicstab::Result<()> {
    let mut out = String::from("word,cluster\n");
    for (word, cluster) in assignment {
        out.push_str(&format!("{word},{cluster}\n"));
    }
    write_file(path, out.as_bytes())
}

pub fn fit_lda(config: &RunConfig) -> CommandResult {
    let corpus = load_corpus(config)?;
    let out = ensure_out(config)?;
    let lda_config = config.lda_config();
    let model = lda_fit(&corpus.matrix, &lda_config)?;

    export_phi(&model, &corpus.vocabulary.words, &out.join("phi.csv"), None)?;
    export_theta(&model, &corpus.matrix.doc_ids, &out.join("theta.csv"))?;
    let s = config.top_words.min(model.n_words);
    let top = top_words(&model, &corpus.vocabulary.words, s)?;
    export_top_words(&top, &out.join("top_words.csv"))?;
    let assignment = word_assignment_lda(&model, &corpus.vocabulary.words);
    export_assignments(&assignment, &out.join("assignments.csv"))?;
    let weights: BTreeMap<String, f64> = assignment
        .iter()
        .map(|(word, &topic)| {
            let w = corpus.vocabulary.position(word).expect("vocabulary word");
            (word.clone(), model.phi_at(topic, w))
        })
        .collect();
    two_mode_export(&assignment, &weights, &out.join("two_mode.csv"))?;

    let mut manifest = corpus_manifest(config, &corpus);
    manifest.set("model.kind", "lda");
    manifest.set("model.k", model.n_topics);
    manifest.set("model.resolved_alpha", model.resolved_alpha);
    manifest.set("model.retained_samples", model.retained_samples);
    manifest.write(&out.join("meta.txt"))?;

    println!(
        "fitted lda: k={}, alpha={}, {} retained samples",
        model.n_topics, model.resolved_alpha, model.retained_samples
    );
    Ok(())
}

pub fn fit_pca(config: &RunConfig) -> CommandResult {
    let corpus = load_corpus(config)?;
    let out = ensure_out(config)?;
    let model = pca_fit::<f64>(&corpus.matrix, config.pca_k)?;

    let mut loadings = String::from("word,factor,loading\n");
    for (row, &word) in model.kept_columns.iter().enumerate() {
        for f in 0..model.k {
            loadings.push_str(&format!(
                "{},{f},{}\n",
                corpus.vocabulary.words[word],
                model.loading(row, f)
            ));
        }
    }
    write_file(&out.join("loadings.csv"), loadings.as_bytes())?;

    let mut scree = String::from("rank,eigenvalue\n");
    for (rank, value) in model.scree.iter().enumerate() {
        scree.push_str(&format!("{},{value}\n", rank + 1));
    }
    write_file(&out.join("scree.csv"), scree.as_bytes())?;

    let scores = factor_scores(&corpus.matrix, &model)?;
    let mut scores_csv = String::from("doc_id,factor,score\n");
    for d in 0..scores.n_docs {
        for f in 0..scores.k {
            scores_csv.push_str(&format!(
                "{},{f},{}\n",
                corpus.matrix.doc_ids[d],
                scores.get(d, f)
            ));
        }
    }
    write_file(&out.join("scores.csv"), scores_csv.as_bytes())?;

    let s = config.top_words.min(model.n_words());
    let top = factor_top_words(&model, &corpus.vocabulary.words, s, config.pca_rank)?;
    export_top_words(&top, &out.join("top_words.csv"))?;
    let assignment = word_assignment_pca(&model, &corpus.vocabulary.words);
    export_assignments(&assignment, &out.join("assignments.csv"))?;
    let weights: BTreeMap<String, f64> = assignment
        .iter()
        .map(|(word, &factor)| {
            let vocab_idx = corpus.vocabulary.position(word).expect("vocabulary word");
            let row = model
                .kept_columns
                .iter()
                .position(|&w| w == vocab_idx)
                .expect("kept column");
            (word.clone(), model.loading(row, factor).abs())
        })
        .collect();
    two_mode_export(&assignment, &weights, &out.join("two_mode.csv"))?;

    let mut manifest = corpus_manifest(config, &corpus);
    manifest.set("model.kind", "pca");
    manifest.set("model.k", model.k);
    manifest.set("model.explained_variance", model.explained_variance);
    manifest.set("model.kaiser_count", model.kaiser_count);
    manifest.set("model.rotation_criterion", model.rotation_criterion);
    manifest.set("model.dropped_columns", model.dropped_columns.len());
    manifest.write(&out.join("meta.txt"))?;

    println!(
        "fitted pca: k={}, explained variance {:.4}, kaiser count {}",
        model.k, model.explained_variance, model.kaiser_count
    );
    Ok(())
}

pub fn cowords(config: &RunConfig) -> CommandResult {
    let corpus = load_corpus(config)?;
    let out = ensure_out(config)?;
    let q = run_cowords(
        &corpus,
        config.cooccur_threshold,
        config.cooccur_resolution,
        &out,
        Some(&corpus_manifest(config, &corpus)),
    )?;
    println!("co-word graph written; modularity Q = {q}");
    Ok(())
}

pub fn stability(config: &RunConfig) -> CommandResult {
    let corpus = load_corpus(config)?;
    let out = ensure_out(config)?;
    let (plan, reduced) = make_ablation_series(
        &corpus,
        config.pool_size,
        config.step,
        config.selection_seed,
        config.fixed_vocabulary,
    )?;
    let stability_config = StabilityConfig {
        methods: config.methods(),
        k_values: config.k_values.clone(),
        settings: config.fit_settings(),
        fresh_seeds: config.fresh_seeds,
    };
    let mut report = run_stability(&corpus, &plan, &reduced, &stability_config);
    report.manifest.merge(&corpus_manifest(config, &corpus));
    emit_stability(&report, &out)?;
    for aggregate in &report.aggregates {
        println!(
            "{} k={}: min={} mean={} max={}",
            aggregate.method,
            aggregate.n_topics,
            opt(aggregate.min),
            opt(aggregate.mean),
            opt(aggregate.max)
        );
    }
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "error".into())
}

pub fn coherence(config: &RunConfig) -> CommandResult {
    let corpus = load_corpus(config)?;
    let out = ensure_out(config)?;
    let coherence_config = CoherenceConfig {
        methods: config.methods(),
        k_values: config.k_values.clone(),
        settings: config.fit_settings(),
        pairs: config.coherence_pairs,
    };
    let mut report = run_coherence_sweep(&corpus, &coherence_config);
    report.manifest.merge(&corpus_manifest(config, &corpus));
    emit_coherence(&report, &out)?;
    for row in &report.rows {
        println!(
            "{} k={}: mean coherence {}",
            row.method,
            row.n_topics,
            opt(row.mean_coherence)
        );
    }
    Ok(())
}

pub fn reliability(config: &RunConfig) -> CommandResult {
    let corpus = load_corpus(config)?;
    let out = ensure_out(config)?;
    let reliability_config = ReliabilityConfig {
        k: config.lda_k,
        seeds: config.seeds.clone(),
        settings: config.fit_settings(),
    };
    let mut report = run_seed_reliability(&corpus, &reliability_config)?;
    report.manifest.merge(&corpus_manifest(config, &corpus));
    emit_reliability(&report, &out)?;
    for row in &report.rows {
        println!(
            "seeds {} vs {}: V={:.4} (chi2={:.2}, df={}, p={:.3e}), topSim={:.4}",
            row.seed_a, row.seed_b, row.cramers_v, row.chi2, row.df, row.p, row.top_sim
        );
    }
    Ok(())
}

/// A saved model directory reloaded for comparison.
struct SavedModel {
    kind: String,
    /// Per cluster: (word, score) rows.
    clusters: BTreeMap<usize, Vec<(String, f64)>>,
    rank: LoadingRank,
}

impl SavedModel {
    fn load(dir: &Path) -> Result<SavedModel, CliError> {
        let meta_path = dir.join("meta.txt");
        let meta = std::fs::read_to_string(&meta_path)
            .map_err(|e| CliError::Core(topicstab::Error::io(&meta_path, e)))?;
        let mut kind = None;
        let mut rank = LoadingRank::Signed;
        for line in meta.lines() {
            if let Some((key, value)) = line.split_once('=') {
                match key {
                    "model.kind" => kind = Some(value.to_string()),
                    "pca.rank" if value == "absolute" => rank = LoadingRank::Absolute,
                    _ => {}
                }
            }
        }
        let kind = kind.ok_or_else(|| {
            CliError::Usage(format!("{} has no model.kind entry", meta_path.display()))
        })?;

        let (file, score_col) = match kind.as_str() {
            "lda" => ("phi.csv", 2),
            "pca" => ("loadings.csv", 2),
            other => {
                return Err(CliError::Usage(format!(
                    "unsupported model.kind {other:?} in {}",
                    meta_path.display()
                )))
            }
        };
        let path = dir.join(file);
        let body = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Core(topicstab::Error::io(&path, e)))?;
        let mut clusters: BTreeMap<usize, Vec<(String, f64)>> = BTreeMap::new();
        for line in body.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(CliError::Core(topicstab::Error::input(format!(
                    "malformed row in {}: {line:?}",
                    path.display()
                ))));
            }
            let (cluster_field, word_field) = if kind == "lda" {
                (fields[0], fields[1])
            } else {
                (fields[1], fields[0])
            };
            let cluster: usize = cluster_field.parse().map_err(|_| {
                CliError::Core(topicstab::Error::input(format!(
                    "bad cluster id in {}: {line:?}",
                    path.display()
                )))
            })?;
            let score: f64 = fields[score_col].parse().map_err(|_| {
                CliError::Core(topicstab::Error::input(format!(
                    "bad score in {}: {line:?}",
                    path.display()
                )))
            })?;
            clusters
                .entry(cluster)
                .or_default()
                .push((word_field.to_string(), score));
        }
        Ok(SavedModel {
            kind,
            clusters,
            rank,
        })
    }

    fn top_words(&self, s: usize) -> Result<TopicTopWords, CliError> {
        let mut topics = Vec::new();
        for (cluster, rows) in &self.clusters {
            let mut ranked = rows.clone();
            let absolute = self.kind == "pca" && self.rank == LoadingRank::Absolute;
            ranked.sort_by(|a, b| {
                let (sa, sb) = if absolute {
                    (a.1.abs(), b.1.abs())
                } else {
                    (a.1, b.1)
                };
                sb.partial_cmp(&sa)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.0.cmp(&b.0))
            });
            if ranked.len() < s {
                return Err(CliError::Usage(format!(
                    "cluster {cluster} has only {} saved words but S={s}",
                    ranked.len()
                )));
            }
            topics.push(ranked.into_iter().take(s).map(|(w, _)| w).collect());
        }
        Ok(TopicTopWords { topics })
    }

    fn assignment(&self) -> WordAssignment {
        // Word -> cluster with the strongest score; ties take the lower
        // cluster id. PCA assignment always uses absolute loadings.
        let mut best: BTreeMap<String, (usize, f64)> = BTreeMap::new();
        for (&cluster, rows) in &self.clusters {
            for (word, score) in rows {
                let magnitude = if self.kind == "pca" { score.abs() } else { *score };
                match best.get(word) {
                    Some(&(_, current)) if current >= magnitude => {}
                    _ => {
                        best.insert(word.clone(), (cluster, magnitude));
                    }
                }
            }
        }
        best.into_iter().map(|(w, (c, _))| (w, c)).collect()
    }
}

pub fn compare(config: &RunConfig, dir_a: &Path, dir_b: &Path) -> CommandResult {
    let a = SavedModel::load(dir_a)?;
    let b = SavedModel::load(dir_b)?;
    let s = config.top_words;
    let top_a = a.top_words(s)?;
    let top_b = b.top_words(s)?;
    let sim_ab: f64 = top_sim_between(&top_a, &top_b)?;
    let sim_ba: f64 = top_sim_between(&top_b, &top_a)?;
    let association = cramers_v::<f64>(&a.assignment(), &b.assignment())?;

    let out = ensure_out(config)?;
    let mut csv = String::from("measure,value\n");
    csv.push_str(&format!("top_sim_a_vs_b,{sim_ab}\n"));
    csv.push_str(&format!("top_sim_b_vs_a,{sim_ba}\n"));
    csv.push_str(&format!("cramers_v,{}\n", association.v));
    csv.push_str(&format!("chi2,{}\n", association.chi2));
    csv.push_str(&format!("df,{}\n", association.df));
    csv.push_str(&format!("p,{}\n", association.p));
    csv.push_str(&format!("shared_words,{}\n", association.n));
    csv.push_str(&format!("dropped_words,{}\n", association.dropped));
    write_file(&out.join("compare.csv"), csv.as_bytes())?;

    println!(
        "topSim(a as test vs b) = {sim_ab}, topSim(b as test vs a) = {sim_ba}, \
         Cramér's V = {} (chi2 = {}, df = {}, p = {:.3e}) over {} shared words",
        association.v, association.chi2, association.df, association.p, association.n
    );
    Ok(())
}
