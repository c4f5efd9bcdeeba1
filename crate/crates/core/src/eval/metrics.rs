use std::collections::HashSet;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::graph::is_relevant;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub ndcg: f64,
}

/// Precision, recall, F1 and binary-gain nDCG of the first `k` entries.
///
/// Precision divides by `min(k, ranked.len())`. Recall and nDCG are 0 when
/// nothing is relevant; F1 is 0 when precision and recall both are.
pub fn metrics_at_k<I: Eq + Hash>(ranked: &[I], relevant: &HashSet<I>, k: usize) -> Metrics {
    let cut = k.min(ranked.len());
    if cut == 0 {
        return Metrics::default();
    }
    let mut hits = 0usize;
    let mut dcg = 0.0;
    for (rank, item) in ranked[..cut].iter().enumerate() {
        if relevant.contains(item) {
            hits += 1;
            dcg += 1.0 / (rank as f64 + 2.0).log2();
        }
    }
    let precision = hits as f64 / cut as f64;
    let recall = if relevant.is_empty() {
        0.0
    } else {
        hits as f64 / relevant.len() as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    let ideal: f64 = (0..relevant.len().min(cut))
        .map(|r| 1.0 / (r as f64 + 2.0).log2())
        .sum();
    let ndcg = if ideal == 0.0 { 0.0 } else { dcg / ideal };
    Metrics {
        precision,
        recall,
        f1,
        ndcg,
    }
}

/// Items whose test rating exceeds the relevance threshold.
pub fn relevance_labels<I: Eq + Hash + Clone>(test: &[(I, f64)]) -> HashSet<I> {
    test.iter()
        .filter(|(_, r)| is_relevant(*r))
        .map(|(i, _)| i.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_ranking() {
        let rel: HashSet<_> = [1, 2, 3].into();
        let m = metrics_at_k(&[1, 2, 3], &rel, 3);
        assert_eq!(m, Metrics { precision: 1.0, recall: 1.0, f1: 1.0, ndcg: 1.0 });
    }

    #[test]
    fn no_hits() {
        let rel: HashSet<_> = [9].into();
        assert_eq!(metrics_at_k(&[1, 2, 3, 9], &rel, 3), Metrics::default());
    }

    #[test]
    fn hand_example() {
        let rel: HashSet<_> = ["i2"].into();
        let m = metrics_at_k(&["i1", "i2", "i3"], &rel, 2);
        assert_eq!(m.precision, 0.5);
        assert_eq!(m.recall, 1.0);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.ndcg - 1.0 / 3f64.log2()).abs() < 1e-15);
        assert!((m.ndcg - 0.6309).abs() < 1e-4);
    }

    #[test]
    fn labels() {
        assert_eq!(relevance_labels(&[("i1", 5.0), ("i2", 2.0)]), ["i1"].into());
        assert!(relevance_labels(&[("i1", 3.0), ("i2", 1.0)]).is_empty());
        assert_eq!(relevance_labels(&[("i1", 3.5)]), ["i1"].into());
    }
}
