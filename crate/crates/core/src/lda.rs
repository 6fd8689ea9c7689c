//! Latent Dirichlet Allocation by collapsed Gibbs sampling.
//!
//! Fully deterministic for a fixed `(matrix, config)` pair: the token topics
//! are initialized from a seeded ChaCha8 stream, sweeps visit tokens in
//! (document, position) order, and the estimates average the retained
//! post-burn-in samples.

use rand::distributions::{Distribution, Standard};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::DocTermMatrix;
use crate::error::{Error, Result};
use crate::scalar::{from_f64, from_usize, Real};
use crate::topics::{rank_top_indices, TopicTopWords, WordAssignment};

/// Name of the pseudo-random generator pinned for reproducibility.
pub const RNG_NAME: &str = "chacha8";

/// Document-topic smoothing choice. The default mirrors the literal
/// "50 / number of texts" convention; the per-topic variant (50 / K) is the
/// common toolkit alternative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaMode<T> {
    FiftyOverTexts,
    FiftyOverTopics,
    Fixed(T),
}

/// How phi and theta are estimated from the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EstimateMode {
    /// Average every `thinning`-th sample after burn-in.
    #[default]
    ThinnedMean,
    /// Use only the final sweep's counts.
    LastSample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaConfig<T> {
    pub n_topics: usize,
    pub alpha: AlphaMode<T>,
    pub beta: T,
    pub burn_in: usize,
    pub iterations: usize,
    pub thinning: usize,
    pub seed: u64,
    pub estimate: EstimateMode,
}

impl<T: Real> Default for LdaConfig<T> {
    fn default() -> Self {
        LdaConfig {
            n_topics: 8,
            alpha: AlphaMode::FiftyOverTexts,
            beta: from_f64(0.01),
            burn_in: 40,
            iterations: 1500,
            thinning: 50,
            seed: 42,
            estimate: EstimateMode::ThinnedMean,
        }
    }
}

impl<T: Real> LdaConfig<T> {
    pub fn with_topics(mut self, k: usize) -> Self {
        self.n_topics = k;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Numeric alpha for a corpus of `n_docs` documents.
    pub fn resolve_alpha(&self, n_docs: usize) -> T {
        match self.alpha {
            AlphaMode::FiftyOverTexts => from_f64::<T>(50.0) / from_usize(n_docs.max(1)),
            AlphaMode::FiftyOverTopics => from_f64::<T>(50.0) / from_usize(self.n_topics.max(1)),
            AlphaMode::Fixed(a) => a,
        }
    }

    fn validate(&self, n_docs: usize, total_tokens: u64) -> Result<()> {
        if self.n_topics < 1 {
            return Err(Error::input("n_topics must be at least 1"));
        }
        if total_tokens == 0 {
            return Err(Error::input("cannot fit LDA on an empty matrix"));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::input("burn_in must be smaller than iterations"));
        }
        if self.thinning < 1 {
            return Err(Error::input("thinning must be at least 1"));
        }
        if self.beta <= T::zero() {
            return Err(Error::input("beta must be positive"));
        }
        if self.resolve_alpha(n_docs) <= T::zero() {
            return Err(Error::input("alpha must be positive"));
        }
        if self.estimate == EstimateMode::ThinnedMean
            && (self.iterations - self.burn_in) / self.thinning == 0
        {
            return Err(Error::input(
                "no samples would be retained: iterations - burn_in < thinning",
            ));
        }
        Ok(())
    }
}

/// A fitted topic model.
#[derive(Debug, Clone)]
pub struct LdaModel<T> {
    pub n_topics: usize,
    pub n_words: usize,
    pub n_docs: usize,
    /// Row-major K x V topic-word distributions; rows sum to 1.
    pub phi: Vec<T>,
    /// Row-major D x K document-topic distributions; rows sum to 1.
    pub theta: Vec<T>,
    /// Final-sweep topic label per token, in (document, position) order.
    pub assignments: Vec<u32>,
    pub config: LdaConfig<T>,
    /// The numeric alpha actually used.
    pub resolved_alpha: T,
    /// Fingerprint of the input matrix.
    pub corpus_fingerprint: u64,
    /// Number of retained samples behind the estimates.
    pub retained_samples: usize,
}

impl<T: Real> LdaModel<T> {
    #[inline]
    pub fn phi_at(&self, topic: usize, word: usize) -> T {
        self.phi[topic * self.n_words + word]
    }

    #[inline]
    pub fn theta_at(&self, doc: usize, topic: usize) -> T {
        self.theta[doc * self.n_topics + topic]
    }
}

/// Mutable Gibbs state; separated from `fit_lda` so invariants can be
/// exercised sweep by sweep.
pub(crate) struct GibbsState<T> {
    pub k: usize,
    pub v: usize,
    /// Word index per (document, position).
    pub doc_tokens: Vec<Vec<u32>>,
    /// Topic label per (document, position).
    pub z: Vec<Vec<u32>>,
    /// D x K document-topic counts.
    pub ndk: Vec<u32>,
    /// K x V topic-word counts.
    pub nkv: Vec<u32>,
    /// Tokens per topic.
    pub nk: Vec<u32>,
    /// Tokens per document.
    pub nd: Vec<u32>,
    alpha: T,
    beta: T,
    v_beta: T,
    weights: Vec<T>,
}

impl<T: Real> GibbsState<T>
where
    Standard: Distribution<T>,
{
    fn new(matrix: &DocTermMatrix, k: usize, alpha: T, beta: T, rng: &mut ChaCha8Rng) -> Self {
        let v = matrix.n_words;
        let mut doc_tokens = Vec::with_capacity(matrix.n_docs);
        for row in &matrix.rows {
            let mut tokens = Vec::new();
            for &(w, c) in row {
                for _ in 0..c {
                    tokens.push(w);
                }
            }
            doc_tokens.push(tokens);
        }

        let mut state = GibbsState {
            k,
            v,
            z: doc_tokens.iter().map(|t| vec![0u32; t.len()]).collect(),
            doc_tokens,
            ndk: vec![0; matrix.n_docs * k],
            nkv: vec![0; k * v],
            nk: vec![0; k],
            nd: vec![0; matrix.n_docs],
            alpha,
            beta,
            v_beta: from_usize::<T>(v) * beta,
            weights: vec![T::zero(); k],
        };

        for d in 0..state.doc_tokens.len() {
            for i in 0..state.doc_tokens[d].len() {
                let topic = rng.gen_range(0..k) as u32;
                state.z[d][i] = topic;
                state.increment(d, state.doc_tokens[d][i], topic);
            }
        }
        state
    }

    #[inline]
    fn increment(&mut self, d: usize, w: u32, topic: u32) {
        self.ndk[d * self.k + topic as usize] += 1;
        self.nkv[topic as usize * self.v + w as usize] += 1;
        self.nk[topic as usize] += 1;
        self.nd[d] += 1;
    }

    #[inline]
    fn decrement(&mut self, d: usize, w: u32, topic: u32) {
        self.ndk[d * self.k + topic as usize] -= 1;
        self.nkv[topic as usize * self.v + w as usize] -= 1;
        self.nk[topic as usize] -= 1;
        self.nd[d] -= 1;
    }

    /// One full Gibbs sweep over all tokens in (document, position) order.
    pub fn sweep(&mut self, rng: &mut ChaCha8Rng) {
        for d in 0..self.doc_tokens.len() {
            for i in 0..self.doc_tokens[d].len() {
                let w = self.doc_tokens[d][i];
                let old = self.z[d][i];
                self.decrement(d, w, old);

                // p(k) ∝ (n_dk + α)(n_kw + β)/(n_k + Vβ)
                let mut total = T::zero();
                for t in 0..self.k {
                    let doc_part = from_usize::<T>(self.ndk[d * self.k + t] as usize) + self.alpha;
                    let word_part =
                        from_usize::<T>(self.nkv[t * self.v + w as usize] as usize) + self.beta;
                    let topic_norm = from_usize::<T>(self.nk[t] as usize) + self.v_beta;
                    total = total + doc_part * word_part / topic_norm;
                    self.weights[t] = total;
                }

                let u: T = rng.gen::<T>() * total;
                let mut chosen = self.k - 1;
                for (t, &cum) in self.weights.iter().enumerate() {
                    if u < cum {
                        chosen = t;
                        break;
                    }
                }
                let chosen = chosen as u32;
                self.z[d][i] = chosen;
                self.increment(d, w, chosen);
            }
        }
    }

    /// Smoothed phi estimate from the current counts, added into `acc`.
    fn accumulate_phi(&self, acc: &mut [T]) {
        for t in 0..self.k {
            let denom = from_usize::<T>(self.nk[t] as usize) + self.v_beta;
            for w in 0..self.v {
                acc[t * self.v + w] = acc[t * self.v + w]
                    + (from_usize::<T>(self.nkv[t * self.v + w] as usize) + self.beta) / denom;
            }
        }
    }

    /// Smoothed theta estimate from the current counts, added into `acc`.
    fn accumulate_theta(&self, acc: &mut [T], alpha: T) {
        let k_alpha = from_usize::<T>(self.k) * alpha;
        for d in 0..self.nd.len() {
            let denom = from_usize::<T>(self.nd[d] as usize) + k_alpha;
            for t in 0..self.k {
                acc[d * self.k + t] = acc[d * self.k + t]
                    + (from_usize::<T>(self.ndk[d * self.k + t] as usize) + alpha) / denom;
            }
        }
    }
}

/// Fit a topic model with collapsed Gibbs sampling.
pub fn fit_lda<T: Real>(matrix: &DocTermMatrix, config: &LdaConfig<T>) -> Result<LdaModel<T>>
where
    Standard: Distribution<T>,
{
    config.validate(matrix.n_docs, matrix.total_count())?;
    let k = config.n_topics;
    let v = matrix.n_words;
    let d = matrix.n_docs;
    let alpha = config.resolve_alpha(d);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = GibbsState::new(matrix, k, alpha, config.beta, &mut rng);

    let mut phi_acc = vec![T::zero(); k * v];
    let mut theta_acc = vec![T::zero(); d * k];
    let mut retained = 0usize;
    for sweep in 1..=config.iterations {
        state.sweep(&mut rng);
        let past_burn_in = sweep > config.burn_in;
        if config.estimate == EstimateMode::ThinnedMean
            && past_burn_in
            && (sweep - config.burn_in).is_multiple_of(config.thinning)
        {
            state.accumulate_phi(&mut phi_acc);
            state.accumulate_theta(&mut theta_acc, alpha);
            retained += 1;
        }
    }
    if config.estimate == EstimateMode::LastSample {
        state.accumulate_phi(&mut phi_acc);
        state.accumulate_theta(&mut theta_acc, alpha);
        retained = 1;
    }

    let scale = T::one() / from_usize::<T>(retained);
    for x in phi_acc.iter_mut() {
        *x = *x * scale;
    }
    for x in theta_acc.iter_mut() {
        *x = *x * scale;
    }

    let assignments = state.z.iter().flat_map(|row| row.iter().copied()).collect();

    Ok(LdaModel {
        n_topics: k,
        n_words: v,
        n_docs: d,
        phi: phi_acc,
        theta: theta_acc,
        assignments,
        config: config.clone(),
        resolved_alpha: alpha,
        corpus_fingerprint: matrix.fingerprint(),
        retained_samples: retained,
    })
}

/// Top-S words per topic by phi, ties broken by ascending vocabulary index.
pub fn top_words<T: Real>(
    model: &LdaModel<T>,
    vocabulary: &[String],
    s: usize,
) -> Result<TopicTopWords> {
    if s > model.n_words {
        return Err(Error::input(format!(
            "requested {s} top words but the vocabulary holds {}",
            model.n_words
        )));
    }
    let mut topics = Vec::with_capacity(model.n_topics);
    for t in 0..model.n_topics {
        let row = &model.phi[t * model.n_words..(t + 1) * model.n_words];
        let top = rank_top_indices(row, s);
        topics.push(top.into_iter().map(|w| vocabulary[w].clone()).collect());
    }
    Ok(TopicTopWords { topics })
}

/// Map every vocabulary word to its argmax topic; ties take the lowest
/// topic index.
pub fn word_assignment_lda<T: Real>(model: &LdaModel<T>, vocabulary: &[String]) -> WordAssignment {
    let mut assignment = WordAssignment::new();
    for (w, word) in vocabulary.iter().enumerate() {
        let mut best = 0;
        for t in 1..model.n_topics {
            if model.phi_at(t, w) > model.phi_at(best, w) {
                best = t;
            }
        }
        assignment.insert(word.clone(), best);
    }
    assignment
}

/// Write phi as `topic,word,probability`, ranked within each topic. `top_n`
/// limits the rows per topic; `None` writes the full distribution.
pub fn export_phi<T: Real>(
    model: &LdaModel<T>,
    vocabulary: &[String],
    path: &std::path::Path,
    top_n: Option<usize>,
) -> Result<()> {
    let per_topic = top_n.unwrap_or(model.n_words).min(model.n_words);
    let mut out = String::from("topic,word,probability\n");
    for t in 0..model.n_topics {
        let row = &model.phi[t * model.n_words..(t + 1) * model.n_words];
        for w in rank_top_indices(row, per_topic) {
            out.push_str(&format!("{t},{},{}\n", vocabulary[w], row[w]));
        }
    }
    crate::corpus::write_file(path, out.as_bytes())
}

/// Write theta as `doc_id,topic,probability`.
pub fn export_theta<T: Real>(
    model: &LdaModel<T>,
    doc_ids: &[usize],
    path: &std::path::Path,
) -> Result<()> {
    let mut out = String::from("doc_id,topic,probability\n");
    for (d, doc_id) in doc_ids.iter().enumerate().take(model.n_docs) {
        for t in 0..model.n_topics {
            out.push_str(&format!("{doc_id},{t},{}\n", model.theta_at(d, t)));
        }
    }
    crate::corpus::write_file(path, out.as_bytes())
}
