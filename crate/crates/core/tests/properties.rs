//! Property tests over the crate's structural invariants.

use proptest::collection::vec;
use proptest::prelude::*;

use topicstab::cooccur::cosine_matrix;
use topicstab::corpus::{doc_frequencies, Corpus, PreprocessOptions};
use topicstab::metrics::{chi_square_p, cramers_v, top_sim_between};
use topicstab::topics::{TopicTopWords, WordAssignment};

/// Random toy corpus: up to 12 documents over a 10-word alphabet.
fn corpus_strategy() -> impl Strategy<Value = Corpus> {
    vec(vec(0u8..10, 1..15), 1..12).prop_map(|docs| {
        let texts: Vec<String> = docs
            .iter()
            .map(|doc| {
                doc.iter()
                    .map(|w| format!("w{w}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        Corpus::build(&texts, PreprocessOptions::keep_everything())
    })
}

/// Random top-word model with the given shape; words drawn from a shared
/// alphabet, distinct within each topic.
fn model_strategy(t: usize, s: usize) -> impl Strategy<Value = TopicTopWords> {
    vec(vec(0u8..30, s..=s), t..=t).prop_filter_map("distinct words per topic", move |topics| {
        let mut out = Vec::with_capacity(topics.len());
        for words in topics {
            let mut seen = std::collections::HashSet::new();
            let topic: Vec<String> = words.iter().map(|w| format!("w{w}")).collect();
            if !topic.iter().all(|w| seen.insert(w.clone())) {
                return None;
            }
            out.push(topic);
        }
        Some(TopicTopWords { topics: out })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vocabulary_totals_match_matrix_totals(corpus in corpus_strategy()) {
        let vocab_total: u64 = corpus.vocabulary.total_occurrences.iter().sum();
        prop_assert_eq!(vocab_total, corpus.matrix.total_count());
        prop_assert!((0.0..=1.0).contains(&corpus.vocabulary.coverage));
    }

    #[test]
    fn co_document_frequencies_are_bounded_and_symmetric(corpus in corpus_strategy()) {
        let dfi = doc_frequencies(&corpus.matrix, None);
        let v = corpus.vocabulary.len();
        for i in 0..v {
            prop_assert_eq!(dfi.co_frequency(i, i), dfi.doc_frequency(i));
            for j in 0..v {
                let co = dfi.co_frequency(i, j);
                prop_assert_eq!(co, dfi.co_frequency(j, i));
                prop_assert!(co <= dfi.doc_frequency(i).min(dfi.doc_frequency(j)));
            }
        }
    }

    #[test]
    fn cosine_weights_live_in_unit_interval(corpus in corpus_strategy()) {
        let graph = cosine_matrix::<f64>(&corpus.matrix, 0.0);
        for &(a, b, w) in &graph.edges {
            prop_assert!(a < b, "self-loop or unordered edge");
            prop_assert!(w > 0.0 && w <= 1.0, "weight {w}");
        }
    }

    #[test]
    fn top_sim_range_and_self_similarity(model in model_strategy(3, 4)) {
        let self_sim: f64 = top_sim_between(&model, &model).unwrap();
        prop_assert_eq!(self_sim, 1.0);
    }

    #[test]
    fn top_sim_invariant_under_topic_permutations(
        test in model_strategy(3, 4),
        reference in model_strategy(3, 4),
        perm_seed in 0usize..6,
    ) {
        let base: f64 = top_sim_between(&test, &reference).unwrap();
        prop_assert!((0.0..=1.0).contains(&base));

        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let perm = perms[perm_seed];
        let permute = |m: &TopicTopWords| TopicTopWords {
            topics: perm.iter().map(|&i| m.topics[i].clone()).collect(),
        };
        let perm_test: f64 = top_sim_between(&permute(&test), &reference).unwrap();
        let perm_ref: f64 = top_sim_between(&test, &permute(&reference)).unwrap();
        prop_assert_eq!(base, perm_test);
        prop_assert_eq!(base, perm_ref);
    }

    #[test]
    fn cramers_v_invariant_under_relabeling(
        labels_a in vec(0usize..4, 8..20),
        labels_b in vec(0usize..4, 8..20),
        offset in 1usize..5,
    ) {
        let n = labels_a.len().min(labels_b.len());
        let a: WordAssignment = (0..n).map(|i| (format!("w{i}"), labels_a[i])).collect();
        let b: WordAssignment = (0..n).map(|i| (format!("w{i}"), labels_b[i])).collect();
        let base: topicstab::CramersV64 = cramers_v(&a, &b).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&base.v));

        // Relabel b's clusters by an order-reversing shift.
        let relabeled: WordAssignment = b
            .iter()
            .map(|(w, &c)| (w.clone(), 100 + offset * (4 - c)))
            .collect();
        // Relabeling permutes the cells and with them the float summation
        // order, so equality holds to rounding, not bitwise.
        let shifted: topicstab::CramersV64 = cramers_v(&a, &relabeled).unwrap();
        prop_assert!((base.chi2 - shifted.chi2).abs() <= 1e-12 * (1.0 + base.chi2));
        prop_assert!((base.v - shifted.v).abs() <= 1e-12);
        prop_assert_eq!(base.df, shifted.df);
    }

    #[test]
    fn chi_square_tail_is_decreasing_and_in_range(
        df in 1usize..8,
        steps in vec(0.1f64..5.0, 2..10),
    ) {
        let mut chi2 = 0.0;
        let mut last: f64 = chi_square_p(chi2, df).unwrap();
        prop_assert_eq!(last, 1.0);
        for step in steps {
            chi2 += step;
            let p: f64 = chi_square_p(chi2, df).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert!(p < last);
            last = p;
        }
    }
}
