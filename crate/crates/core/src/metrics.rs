//! The three model-comparison measures: topSim (best-match top-word
//! overlap), per-topic semantic coherence over co-document frequencies, and
//! Cramér's V with its chi-square significance.

use std::collections::{BTreeSet, HashSet};

use crate::corpus::DocumentFrequencyIndex;
use crate::error::{Error, Result};
use crate::scalar::{from_usize, Real};
use crate::special::gamma_q;
use crate::topics::{TopicTopWords, WordAssignment};

/// Validated pair of top-word models with matching shape.
#[derive(Debug, Clone)]
pub struct ModelComparisonInput<'a> {
    pub test: &'a TopicTopWords,
    pub reference: &'a TopicTopWords,
    pub n_topics: usize,
    pub words_per_topic: usize,
}

impl<'a> ModelComparisonInput<'a> {
    pub fn new(test: &'a TopicTopWords, reference: &'a TopicTopWords) -> Result<Self> {
        let t = test.n_topics();
        let s = test.words_per_topic();
        if t == 0 || s == 0 {
            return Err(Error::input("topSim requires at least one topic and word"));
        }
        if reference.n_topics() != t {
            return Err(Error::input(format!(
                "topic counts differ: test has {t}, reference has {}",
                reference.n_topics()
            )));
        }
        for (model, name) in [(test, "test"), (reference, "reference")] {
            for topic in &model.topics {
                if topic.len() != s {
                    return Err(Error::input(format!(
                        "{name} model has uneven topic lengths ({} vs {s})",
                        topic.len()
                    )));
                }
            }
        }
        Ok(ModelComparisonInput {
            test,
            reference,
            n_topics: t,
            words_per_topic: s,
        })
    }
}

/// Best-match top-word overlap, averaged over the test topics:
/// (1/(T*S)) * sum over test topics of the largest intersection with any
/// reference topic. Ranges over [0, 1]; not symmetric.
pub fn top_sim<T: Real>(input: &ModelComparisonInput) -> T {
    let mut total = 0usize;
    for test_topic in &input.test.topics {
        let test_set: HashSet<&str> = test_topic.iter().map(String::as_str).collect();
        let best = input
            .reference
            .topics
            .iter()
            .map(|ref_topic| {
                ref_topic
                    .iter()
                    .filter(|w| test_set.contains(w.as_str()))
                    .count()
            })
            .max()
            .unwrap_or(0);
        total += best;
    }
    from_usize::<T>(total) / from_usize::<T>(input.n_topics * input.words_per_topic)
}

/// Convenience wrapper validating and scoring in one call.
pub fn top_sim_between<T: Real>(test: &TopicTopWords, reference: &TopicTopWords) -> Result<T> {
    Ok(top_sim(&ModelComparisonInput::new(test, reference)?))
}

/// Which pairs enter the coherence sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoherencePairs {
    /// Ordered pairs with the higher-ranked word in the denominator.
    #[default]
    Ordered,
    /// Both orders of every pair.
    BothOrders,
}

/// Semantic coherence of one topic's ranked word list:
/// sum over pairs of log((D(w_i, w_j) + 1) / D(w_j)) with w_j ranked above
/// w_i. A single-word topic scores 0.
pub fn coherence<T: Real>(
    topic_words: &[String],
    dfi: &DocumentFrequencyIndex,
    vocab_index: &dyn Fn(&str) -> Option<usize>,
    pairs: CoherencePairs,
) -> Result<T> {
    let mut ids = Vec::with_capacity(topic_words.len());
    for word in topic_words {
        let id = vocab_index(word)
            .ok_or_else(|| Error::input(format!("word {word:?} is not in the vocabulary")))?;
        ids.push(id);
    }
    let mut total = T::zero();
    for hi in 0..ids.len() {
        for lo in 0..hi {
            total = total + pair_term::<T>(ids[hi], ids[lo], &topic_words[lo], dfi)?;
            if pairs == CoherencePairs::BothOrders {
                total = total + pair_term::<T>(ids[lo], ids[hi], &topic_words[hi], dfi)?;
            }
        }
    }
    Ok(total)
}

fn pair_term<T: Real>(
    wi: usize,
    wj: usize,
    wj_name: &str,
    dfi: &DocumentFrequencyIndex,
) -> Result<T> {
    let denom = dfi.doc_frequency(wj);
    if denom == 0 {
        return Err(Error::input(format!(
            "word {wj_name:?} appears in no document; coherence is undefined"
        )));
    }
    let co = dfi.co_frequency(wi, wj);
    Ok((from_usize::<T>(co as usize + 1) / from_usize::<T>(denom as usize)).ln())
}

/// Arithmetic mean of per-topic coherence.
pub fn mean_coherence<T: Real>(
    top_words: &TopicTopWords,
    dfi: &DocumentFrequencyIndex,
    vocab_index: &dyn Fn(&str) -> Option<usize>,
    pairs: CoherencePairs,
) -> Result<T> {
    if top_words.topics.is_empty() {
        return Err(Error::input("mean coherence of an empty model"));
    }
    let mut total = T::zero();
    for topic in &top_words.topics {
        total = total + coherence::<T>(topic, dfi, vocab_index, pairs)?;
    }
    Ok(total / from_usize::<T>(top_words.topics.len()))
}

/// Association between two word classifications.
#[derive(Debug, Clone)]
pub struct CramersV<T> {
    pub v: T,
    pub chi2: T,
    pub df: usize,
    pub p: T,
    /// Size of the shared word set the table was built from.
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    /// Words present in only one of the maps, dropped from the table.
    pub dropped: usize,
    /// True when either side has a single cluster (V defined as 0).
    pub degenerate: bool,
}

/// Cramér's V between two word->cluster maps, over their shared word set.
pub fn cramers_v<T: Real>(a: &WordAssignment, b: &WordAssignment) -> Result<CramersV<T>> {
    let shared: Vec<&String> = a.keys().filter(|w| b.contains_key(*w)).collect();
    if shared.is_empty() {
        return Err(Error::input(
            "the two assignments share no words; Cramér's V is undefined",
        ));
    }
    let dropped = a.len() + b.len() - 2 * shared.len();

    // Contiguous cluster ids per side, in sorted cluster order.
    let a_ids: Vec<usize> = {
        let set: BTreeSet<usize> = shared.iter().map(|w| a[*w]).collect();
        set.into_iter().collect()
    };
    let b_ids: Vec<usize> = {
        let set: BTreeSet<usize> = shared.iter().map(|w| b[*w]).collect();
        set.into_iter().collect()
    };
    let rows = a_ids.len();
    let cols = b_ids.len();
    let a_pos = |c: usize| a_ids.binary_search(&c).unwrap();
    let b_pos = |c: usize| b_ids.binary_search(&c).unwrap();

    let mut table = vec![0u64; rows * cols];
    for word in &shared {
        table[a_pos(a[*word]) * cols + b_pos(b[*word])] += 1;
    }
    let n = shared.len();

    if rows.min(cols) < 2 {
        // Single-cluster side: observed always equals expected.
        return Ok(CramersV {
            v: T::zero(),
            chi2: T::zero(),
            df: 0,
            p: T::one(),
            n,
            rows,
            cols,
            dropped,
            degenerate: true,
        });
    }

    let mut row_sum = vec![0u64; rows];
    let mut col_sum = vec![0u64; cols];
    for r in 0..rows {
        for c in 0..cols {
            row_sum[r] += table[r * cols + c];
            col_sum[c] += table[r * cols + c];
        }
    }
    let n_t = from_usize::<T>(n);
    let mut chi2 = T::zero();
    for r in 0..rows {
        for c in 0..cols {
            let expected =
                from_usize::<T>(row_sum[r] as usize) * from_usize::<T>(col_sum[c] as usize) / n_t;
            if expected > T::zero() {
                let diff = from_usize::<T>(table[r * cols + c] as usize) - expected;
                chi2 = chi2 + diff * diff / expected;
            }
        }
    }
    let df = (rows - 1) * (cols - 1);
    let min_dim = from_usize::<T>(rows.min(cols) - 1);
    let v = (chi2 / (n_t * min_dim)).sqrt().min(T::one());
    let p = chi_square_p(chi2, df)?;
    Ok(CramersV {
        v,
        chi2,
        df,
        p,
        n,
        rows,
        cols,
        dropped,
        degenerate: false,
    })
}

/// Upper-tail probability of the chi-square distribution, via the
/// regularized upper incomplete gamma function.
pub fn chi_square_p<T: Real>(chi2: T, df: usize) -> Result<T> {
    if df < 1 {
        return Err(Error::input("chi-square requires df >= 1"));
    }
    if chi2 < T::zero() {
        return Err(Error::input("chi-square statistic must be nonnegative"));
    }
    let two = from_usize::<T>(2);
    gamma_q(from_usize::<T>(df) / two, chi2 / two)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{doc_frequencies, Corpus, PreprocessOptions};

    fn topics(lists: &[&[&str]]) -> TopicTopWords {
        TopicTopWords {
            topics: lists
                .iter()
                .map(|l| l.iter().map(|s| s.to_string()).collect())
                .collect(),
        }
    }

    #[test]
    fn top_sim_self_similarity_is_exactly_one() {
        let m = topics(&[&["a", "b", "c"], &["d", "e", "f"]]);
        let v: f64 = top_sim_between(&m, &m).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn top_sim_disjoint_vocabularies_score_zero() {
        let a = topics(&[&["a", "b"], &["c", "d"]]);
        let b = topics(&[&["x", "y"], &["z", "w"]]);
        let v: f64 = top_sim_between(&a, &b).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn top_sim_hand_case() {
        // test {a,b,c},{d,e,f} vs ref {a,b,x},{d,y,z} -> (2+1)/6 = 0.5
        let test = topics(&[&["a", "b", "c"], &["d", "e", "f"]]);
        let reference = topics(&[&["a", "b", "x"], &["d", "y", "z"]]);
        let v: f64 = top_sim_between(&test, &reference).unwrap();
        assert_eq!(v, 0.5);
    }

    #[test]
    fn top_sim_is_asymmetric() {
        let a = topics(&[&["a", "b"], &["a", "c"]]);
        let b = topics(&[&["a", "b"], &["x", "y"]]);
        let ab: f64 = top_sim_between(&a, &b).unwrap();
        let ba: f64 = top_sim_between(&b, &a).unwrap();
        assert_eq!(ab, 0.75);
        assert_eq!(ba, 0.5);
        assert_ne!(ab, ba);
    }

    #[test]
    fn top_sim_invariant_under_topic_permutation() {
        let test = topics(&[&["a", "b"], &["c", "d"], &["e", "f"]]);
        let reference = topics(&[&["a", "x"], &["c", "d"], &["e", "y"]]);
        let base: f64 = top_sim_between(&test, &reference).unwrap();

        let test_perm = topics(&[&["e", "f"], &["a", "b"], &["c", "d"]]);
        let ref_perm = topics(&[&["e", "y"], &["a", "x"], &["c", "d"]]);
        assert_eq!(top_sim_between::<f64>(&test_perm, &reference).unwrap(), base);
        assert_eq!(top_sim_between::<f64>(&test, &ref_perm).unwrap(), base);
    }

    #[test]
    fn top_sim_shape_mismatch_rejected() {
        let a = topics(&[&["a", "b"]]);
        let b = topics(&[&["a", "b"], &["c", "d"]]);
        assert!(ModelComparisonInput::new(&a, &b).is_err());
        let uneven = TopicTopWords {
            topics: vec![vec!["a".into(), "b".into()], vec!["c".into()]],
        };
        assert!(ModelComparisonInput::new(&uneven, &uneven).is_err());
    }

    fn toy_dfi() -> (Corpus, DocumentFrequencyIndex) {
        let texts = vec![
            "alpha beta gamma".to_string(),
            "alpha beta".to_string(),
            "alpha delta".to_string(),
            "beta delta".to_string(),
            "alpha beta gamma delta".to_string(),
        ];
        let corpus = Corpus::build(&texts, PreprocessOptions::keep_everything());
        let dfi = doc_frequencies(&corpus.matrix, None);
        (corpus, dfi)
    }

    #[test]
    fn coherence_single_word_topic_is_zero() {
        let (corpus, dfi) = toy_dfi();
        let lookup = |w: &str| corpus.vocabulary.position(w);
        let c: f64 = coherence(
            &["alpha".to_string()],
            &dfi,
            &lookup,
            CoherencePairs::Ordered,
        )
        .unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn coherence_two_word_hand_case() {
        // D(w1) = 10, D(w1, w2) = 10 -> log(11/10).
        let texts: Vec<String> = (0..10).map(|_| "first second".to_string()).collect();
        let corpus = Corpus::build(&texts, PreprocessOptions::keep_everything());
        let dfi = doc_frequencies(&corpus.matrix, None);
        let lookup = |w: &str| corpus.vocabulary.position(w);
        let c: f64 = coherence(
            &["first".to_string(), "second".to_string()],
            &dfi,
            &lookup,
            CoherencePairs::Ordered,
        )
        .unwrap();
        assert!((c - (11.0f64 / 10.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn coherence_matches_brute_force_document_scan() {
        let (corpus, dfi) = toy_dfi();
        let lookup = |w: &str| corpus.vocabulary.position(w);
        let words: Vec<String> = ["alpha", "beta", "gamma", "delta"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let got: f64 = coherence(&words, &dfi, &lookup, CoherencePairs::Ordered).unwrap();

        // Brute force straight over the document token sets.
        let doc_sets: Vec<std::collections::HashSet<&str>> = corpus
            .documents
            .iter()
            .map(|d| d.tokens.iter().map(String::as_str).collect())
            .collect();
        let count = |w: &str| doc_sets.iter().filter(|s| s.contains(w)).count() as f64;
        let count2 = |a: &str, b: &str| {
            doc_sets
                .iter()
                .filter(|s| s.contains(a) && s.contains(b))
                .count() as f64
        };
        let mut expected = 0.0;
        for i in 0..words.len() {
            for j in 0..i {
                expected += ((count2(&words[i], &words[j]) + 1.0) / count(&words[j])).ln();
            }
        }
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn coherence_monotone_in_co_document_count() {
        // Vary D(w1, w2) while holding D(w1), D(w2) fixed.
        let mut previous = f64::NEG_INFINITY;
        for co in 0..4 {
            let mut texts = Vec::new();
            for i in 0..4 {
                if i < co {
                    texts.push("w1 w2".to_string());
                } else {
                    texts.push("w1 pad1".to_string());
                    texts.push("w2 pad1".to_string());
                }
            }
            let corpus = Corpus::build(&texts, PreprocessOptions::keep_everything());
            let dfi = doc_frequencies(&corpus.matrix, None);
            let lookup = |w: &str| corpus.vocabulary.position(w);
            let c: f64 = coherence(
                &["w1".to_string(), "w2".to_string()],
                &dfi,
                &lookup,
                CoherencePairs::Ordered,
            )
            .unwrap();
            assert!(c > previous, "coherence should grow with co-occurrence");
            previous = c;
        }
    }

    #[test]
    fn coherence_term_bounds() {
        let (corpus, dfi) = toy_dfi();
        let lookup = |w: &str| corpus.vocabulary.position(w);
        for pair in [["alpha", "beta"], ["gamma", "delta"], ["alpha", "gamma"]] {
            let c: f64 = coherence(
                &[pair[0].to_string(), pair[1].to_string()],
                &dfi,
                &lookup,
                CoherencePairs::Ordered,
            )
            .unwrap();
            let d_j = dfi.doc_frequency(corpus.vocabulary.position(pair[0]).unwrap()) as f64;
            assert!(c >= (1.0 / d_j).ln() - 1e-12);
            assert!(c <= ((d_j + 1.0) / d_j).ln() + 1e-12);
        }
    }

    #[test]
    fn both_orders_sums_both_denominators() {
        let (corpus, dfi) = toy_dfi();
        let lookup = |w: &str| corpus.vocabulary.position(w);
        let words = ["alpha".to_string(), "gamma".to_string()];
        let both: f64 = coherence(&words, &dfi, &lookup, CoherencePairs::BothOrders).unwrap();

        let a = corpus.vocabulary.position("alpha").unwrap();
        let g = corpus.vocabulary.position("gamma").unwrap();
        let co = dfi.co_frequency(a, g) as f64;
        let expected = ((co + 1.0) / dfi.doc_frequency(a) as f64).ln()
            + ((co + 1.0) / dfi.doc_frequency(g) as f64).ln();
        assert!((both - expected).abs() < 1e-12);
    }

    #[test]
    fn coherence_unknown_word_is_an_error() {
        let (corpus, dfi) = toy_dfi();
        let lookup = |w: &str| corpus.vocabulary.position(w);
        let err = coherence::<f64>(
            &["alpha".to_string(), "missing".to_string()],
            &dfi,
            &lookup,
            CoherencePairs::Ordered,
        )
        .unwrap_err();
        assert!(err.to_string().contains("missing"));
    }

    #[test]
    fn mean_coherence_mean_of_constants_and_arithmetic() {
        let (corpus, dfi) = toy_dfi();
        let lookup = |w: &str| corpus.vocabulary.position(w);
        let single: f64 = coherence(
            &["alpha".to_string(), "beta".to_string()],
            &dfi,
            &lookup,
            CoherencePairs::Ordered,
        )
        .unwrap();
        let repeated = topics(&[&["alpha", "beta"], &["alpha", "beta"], &["alpha", "beta"]]);
        let mean: f64 =
            mean_coherence(&repeated, &dfi, &lookup, CoherencePairs::Ordered).unwrap();
        assert!((mean - single).abs() < 1e-12);

        let other: f64 = coherence(
            &["gamma".to_string(), "delta".to_string()],
            &dfi,
            &lookup,
            CoherencePairs::Ordered,
        )
        .unwrap();
        let two = topics(&[&["alpha", "beta"], &["gamma", "delta"]]);
        let mean2: f64 = mean_coherence(&two, &dfi, &lookup, CoherencePairs::Ordered).unwrap();
        assert!((mean2 - (single + other) / 2.0).abs() < 1e-12);
    }

    fn assignment(pairs: &[(&str, usize)]) -> WordAssignment {
        pairs.iter().map(|&(w, c)| (w.to_string(), c)).collect()
    }

    #[test]
    fn cramers_v_identical_partitions() {
        let a = assignment(&[("w1", 0), ("w2", 0), ("w3", 1), ("w4", 1), ("w5", 2)]);
        let result: CramersV<f64> = cramers_v(&a, &a).unwrap();
        assert!((result.v - 1.0).abs() < 1e-12);
        assert!(!result.degenerate);
    }

    #[test]
    fn cramers_v_hand_two_by_two() {
        // A = {1,2,3,4 | 5,6,7,8}, B = {1,2,3,5 | 4,6,7,8}
        let a = assignment(&[
            ("i1", 0),
            ("i2", 0),
            ("i3", 0),
            ("i4", 0),
            ("i5", 1),
            ("i6", 1),
            ("i7", 1),
            ("i8", 1),
        ]);
        let b = assignment(&[
            ("i1", 0),
            ("i2", 0),
            ("i3", 0),
            ("i5", 0),
            ("i4", 1),
            ("i6", 1),
            ("i7", 1),
            ("i8", 1),
        ]);
        let result: CramersV<f64> = cramers_v(&a, &b).unwrap();
        assert!((result.chi2 - 2.0).abs() < 1e-12);
        assert!((result.v - 0.5).abs() < 1e-12);
        assert_eq!(result.df, 1);
        assert!((result.p - 0.15729920705028105).abs() < 1e-6);
    }

    #[test]
    fn cramers_v_invariant_under_relabeling() {
        let a = assignment(&[("w1", 0), ("w2", 1), ("w3", 1), ("w4", 2), ("w5", 0)]);
        let b = assignment(&[("w1", 5), ("w2", 2), ("w3", 2), ("w4", 9), ("w5", 5)]);
        // b is a relabeled a.
        let ab: CramersV<f64> = cramers_v(&a, &b).unwrap();
        assert!((ab.v - 1.0).abs() < 1e-12);

        let c = assignment(&[("w1", 0), ("w2", 0), ("w3", 1), ("w4", 1), ("w5", 1)]);
        let ac: CramersV<f64> = cramers_v(&a, &c).unwrap();
        let relabeled_c = assignment(&[("w1", 7), ("w2", 7), ("w3", 3), ("w4", 3), ("w5", 3)]);
        let ac2: CramersV<f64> = cramers_v(&a, &relabeled_c).unwrap();
        assert_eq!(ac.v, ac2.v);
        assert_eq!(ac.chi2, ac2.chi2);
    }

    #[test]
    fn cramers_v_shared_set_and_degenerate_table() {
        let a = assignment(&[("w1", 0), ("w2", 1)]);
        let b = assignment(&[("w3", 0), ("w4", 1)]);
        assert!(cramers_v::<f64>(&a, &b).is_err());

        let single = assignment(&[("w1", 0), ("w2", 0)]);
        let other = assignment(&[("w1", 0), ("w2", 1)]);
        let result: CramersV<f64> = cramers_v(&single, &other).unwrap();
        assert!(result.degenerate);
        assert_eq!(result.v, 0.0);

        let partial = assignment(&[("w1", 0), ("w2", 1), ("extra", 1)]);
        let result: CramersV<f64> = cramers_v(&partial, &other).unwrap();
        assert_eq!(result.n, 2);
        assert_eq!(result.dropped, 1);
    }

    #[test]
    fn chi_square_p_reference_points() {
        let p: f64 = chi_square_p(0.0, 3).unwrap();
        assert_eq!(p, 1.0);
        let p: f64 = chi_square_p(3.841, 1).unwrap();
        assert!((p - 0.05).abs() < 5e-4);
        let p: f64 = chi_square_p(2.0, 1).unwrap();
        assert!((p - 0.15729920705028105).abs() < 1e-10);
        assert!(chi_square_p::<f64>(1.0, 0).is_err());
        assert!(chi_square_p::<f64>(-1.0, 1).is_err());
    }

    #[test]
    fn chi_square_p_strictly_decreasing() {
        for df in [1usize, 2, 5] {
            let mut last: f64 = 1.1;
            for i in 0..40 {
                let chi2 = i as f64 * 0.5;
                let p: f64 = chi_square_p(chi2, df).unwrap();
                assert!(p < last || (chi2 == 0.0 && p == 1.0), "df={df} chi2={chi2}");
                last = p;
            }
        }
    }
}
