//! Seeded synthetic corpora with planted topic structure, used to exercise
//! the fitting and experiment pipelines on data with a known answer.
//!
//! Generated words carry digits (`t0w03`, `sh12`), so stemming leaves them
//! untouched and the planted lists survive the preprocessing pipeline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::topics::TopicTopWords;

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub n_docs: usize,
    pub n_topics: usize,
    /// Exclusive words per topic.
    pub exclusive_words_per_topic: usize,
    /// How many of those are high-probability (the planted top words).
    pub top_words_per_topic: usize,
    /// Weight ratio of a top word to a tail word.
    pub top_word_boost: f64,
    /// Size of a shared word pool available to every document.
    pub shared_words: usize,
    /// Probability that a token comes from the shared pool.
    pub shared_fraction: f64,
    /// Size of a uniform low-frequency noise pool (0 disables it).
    pub noise_words: usize,
    /// Probability that a token comes from the noise pool.
    pub noise_fraction: f64,
    /// Inclusive document-length range.
    pub doc_len: (usize, usize),
    pub seed: u64,
}

impl SyntheticSpec {
    /// Clean disjoint-support topics, no shared or noise vocabulary.
    pub fn disjoint(n_docs: usize, n_topics: usize, seed: u64) -> Self {
        SyntheticSpec {
            n_docs,
            n_topics,
            exclusive_words_per_topic: 20,
            top_words_per_topic: 10,
            top_word_boost: 4.0,
            shared_words: 0,
            shared_fraction: 0.0,
            noise_words: 0,
            noise_fraction: 0.0,
            doc_len: (30, 50),
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub raw_texts: Vec<String>,
    /// The high-probability words planted in each topic.
    pub planted_top_words: TopicTopWords,
}

/// Generate raw document texts from the settings, deterministically.
pub fn generate(spec: &SyntheticSpec) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let topic_words: Vec<Vec<String>> = (0..spec.n_topics)
        .map(|k| {
            (0..spec.exclusive_words_per_topic)
                .map(|i| format!("t{k}w{i:02}"))
                .collect()
        })
        .collect();
    let shared: Vec<String> = (0..spec.shared_words).map(|i| format!("sh{i:02}")).collect();
    let noise: Vec<String> = (0..spec.noise_words).map(|i| format!("nz{i:02}")).collect();

    // Per-topic cumulative weights: top words boosted over the tail.
    let mut topic_cum: Vec<Vec<f64>> = Vec::with_capacity(spec.n_topics);
    for words in &topic_words {
        let mut cum = Vec::with_capacity(words.len());
        let mut total = 0.0;
        for i in 0..words.len() {
            total += if i < spec.top_words_per_topic {
                spec.top_word_boost
            } else {
                1.0
            };
            cum.push(total);
        }
        topic_cum.push(cum);
    }
    // Shared pool uses a 1/(rank+1) profile.
    let shared_cum: Vec<f64> = {
        let mut cum = Vec::with_capacity(shared.len());
        let mut total = 0.0;
        for i in 0..shared.len() {
            total += 1.0 / (i as f64 + 1.0);
            cum.push(total);
        }
        cum
    };

    let mut raw_texts = Vec::with_capacity(spec.n_docs);
    for d in 0..spec.n_docs {
        let topic = d % spec.n_topics;
        let len = rng.gen_range(spec.doc_len.0..=spec.doc_len.1);
        let mut tokens = Vec::with_capacity(len);
        for _ in 0..len {
            let roll: f64 = rng.gen();
            if roll < spec.noise_fraction && !noise.is_empty() {
                tokens.push(noise[rng.gen_range(0..noise.len())].clone());
            } else if roll < spec.noise_fraction + spec.shared_fraction && !shared.is_empty() {
                tokens.push(shared[weighted_pick(&shared_cum, &mut rng)].clone());
            } else {
                let words = &topic_words[topic];
                tokens.push(words[weighted_pick(&topic_cum[topic], &mut rng)].clone());
            }
        }
        raw_texts.push(tokens.join(" "));
    }

    let planted_top_words = TopicTopWords {
        topics: topic_words
            .iter()
            .map(|words| words[..spec.top_words_per_topic].to_vec())
            .collect(),
    };

    SyntheticCorpus {
        raw_texts,
        planted_top_words,
    }
}

fn weighted_pick(cumulative: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total = *cumulative.last().expect("nonempty weight table");
    let u: f64 = rng.gen::<f64>() * total;
    for (i, &cum) in cumulative.iter().enumerate() {
        if u < cum {
            return i;
        }
    }
    cumulative.len() - 1
}
