//! Shared topic/cluster representations produced by both model families.

use std::collections::BTreeMap;

/// Per-topic top-word lists: `topics[t]` holds the S highest-ranked words of
/// topic t, highest first. All vectors have the same length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicTopWords {
    pub topics: Vec<Vec<String>>,
}

impl TopicTopWords {
    /// Number of topics T.
    pub fn n_topics(&self) -> usize {
        self.topics.len()
    }

    /// Words per topic S (0 for an empty model).
    pub fn words_per_topic(&self) -> usize {
        self.topics.first().map_or(0, Vec::len)
    }
}

/// Hard classification of words into topics/factors/communities.
/// Ordered so that iteration (and everything built from it) is deterministic.
pub type WordAssignment = BTreeMap<String, usize>;

/// Rank `(score, word index)` pairs descending by score; exact ties broken
/// by ascending word index. Returns the indices of the top `s` entries.
pub fn rank_top_indices<T: PartialOrd + Copy>(scores: &[T], s: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order.truncate(s);
    order
}
