use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::bundle::{AspectCounts, ExplanationBundle};
use crate::error::{Error, Result};

/// Statistics pooled over every bundle instead of averaged per bundle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PooledStats {
    pub coverage: f64,
    /// Mean over the covered items of all bundles together.
    pub aspects_per_item: f64,
    /// Distinct aspects across all bundles.
    pub unique_aspects: usize,
    /// Mean of the per-bundle ratios, over bundles with a nonzero denominator.
    pub mean_like_over_other: f64,
}

/// Summary of a set of explanation bundles.
///
/// `coverage`, `unique_aspects` and `aspects_per_item` are means of
/// per-bundle values (`aspects_per_item` over bundles with at least one
/// covered item). `like_over_other` is a ratio of pooled counts and is 0
/// with `like_over_other_undefined` set when no dislike or doesNotCare
/// opinion was gathered.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExplanationStats {
    pub bundles: usize,
    pub cutoff: usize,
    pub coverage: f64,
    pub like_over_other: f64,
    pub like_over_other_undefined: bool,
    pub unique_aspects: f64,
    pub aspects_per_item: f64,
    pub opinions: AspectCounts,
    pub pooled: PooledStats,
}

fn ratio(like: usize, other: usize) -> Option<f64> {
    (other > 0).then(|| like as f64 / other as f64)
}

pub fn explanation_stats(bundles: &[ExplanationBundle]) -> Result<ExplanationStats> {
    let first = bundles
        .first()
        .ok_or_else(|| Error::Invalid("no explanation bundles".into()))?;
    let cutoff = first.cutoff;
    if let Some(b) = bundles.iter().find(|b| b.cutoff != cutoff) {
        return Err(Error::Invalid(format!(
            "bundles disagree on cutoff: {} has {}, {} has {cutoff}",
            b.subject, b.cutoff, first.subject
        )));
    }
    if cutoff == 0 {
        return Err(Error::Invalid("bundle cutoff is 0".into()));
    }

    let n = bundles.len() as f64;
    let mut coverage = 0.0;
    let mut unique = 0.0;
    let mut per_item_means = Vec::new();
    let mut per_item_all = Vec::new();
    let mut totals = AspectCounts::default();
    let mut bundle_ratios = Vec::new();
    let mut all_aspects = HashSet::new();
    for b in bundles {
        let covered: Vec<_> = b.per_item.values().filter(|v| !v.is_empty()).collect();
        coverage += covered.len() as f64 / cutoff as f64;
        let mut aspects = HashSet::new();
        let mut own = AspectCounts::default();
        let mut item_counts = Vec::with_capacity(covered.len());
        for ops in &covered {
            let distinct: HashSet<&str> = ops.iter().map(|o| o.aspect.as_str()).collect();
            item_counts.push(distinct.len() as f64);
            for o in ops.iter() {
                own.add(o.relation);
                aspects.insert(o.aspect.as_str());
                all_aspects.insert(o.aspect.as_str());
            }
        }
        unique += aspects.len() as f64;
        if !item_counts.is_empty() {
            per_item_means.push(item_counts.iter().sum::<f64>() / item_counts.len() as f64);
        }
        per_item_all.extend(item_counts);
        bundle_ratios.extend(ratio(own.like, own.dislike + own.does_not_care));
        totals.merge(own);
    }
    let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    let pooled_ratio = ratio(totals.like, totals.dislike + totals.does_not_care);
    Ok(ExplanationStats {
        bundles: bundles.len(),
        cutoff,
        coverage: coverage / n,
        like_over_other: pooled_ratio.unwrap_or(0.0),
        like_over_other_undefined: pooled_ratio.is_none(),
        unique_aspects: unique / n,
        aspects_per_item: mean(&per_item_means),
        opinions: totals,
        pooled: PooledStats {
            coverage: coverage / n,
            aspects_per_item: mean(&per_item_all),
            unique_aspects: all_aspects.len(),
            mean_like_over_other: mean(&bundle_ratios),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::GatheredOpinion;
    use crate::graph::RelationType;
    use std::collections::BTreeMap;

    fn op(n: &str, a: &str, r: RelationType) -> GatheredOpinion {
        GatheredOpinion {
            neighbor: n.into(),
            aspect: a.into(),
            relation: r,
        }
    }

    fn bundle(cutoff: usize, items: Vec<(&str, Vec<GatheredOpinion>)>) -> ExplanationBundle {
        ExplanationBundle {
            subject: "s".into(),
            cutoff,
            recommended: vec![],
            neighbors: vec![],
            per_item: items.into_iter().map(|(k, v)| (k.to_owned(), v)).collect::<BTreeMap<_, _>>(),
            subject_aspect_profile: BTreeMap::new(),
        }
    }

    #[test]
    fn ratio_of_pooled_counts() {
        use RelationType::*;
        let ops = vec![
            op("a", "x", Like),
            op("b", "x", Like),
            op("c", "y", Like),
            op("d", "y", Like),
            op("a", "z", Dislike),
            op("b", "z", Dislike),
            op("c", "x", Dislike),
            op("d", "x", DoesNotCare),
            op("e", "x", DoesNotCare),
        ];
        let s = explanation_stats(&[bundle(30, vec![("i", ops)])]).unwrap();
        assert!((s.like_over_other - 0.8).abs() < 1e-12);
        assert!(!s.like_over_other_undefined);
        assert_eq!(s.unique_aspects, 3.0);
        assert_eq!(s.aspects_per_item, 3.0);
    }

    #[test]
    fn empty_bundle() {
        let s = explanation_stats(&[bundle(30, vec![])]).unwrap();
        assert_eq!(s.coverage, 0.0);
        assert_eq!(s.unique_aspects, 0.0);
        assert!(s.like_over_other_undefined);
    }

    #[test]
    fn per_bundle_and_pooled_differ() {
        use RelationType::*;
        let a = bundle(2, vec![("i", vec![op("n", "x", Like), op("n", "y", Like)])]);
        let b = bundle(
            2,
            vec![
                ("i", vec![op("n", "z", Dislike)]),
                ("j", vec![op("n", "z", Like)]),
            ],
        );
        let s = explanation_stats(&[a, b]).unwrap();
        assert!((s.coverage - 0.75).abs() < 1e-12);
        assert!((s.aspects_per_item - 1.5).abs() < 1e-12);
        assert!((s.pooled.aspects_per_item - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.pooled.unique_aspects, 3);
        assert!((s.like_over_other - 3.0).abs() < 1e-12);
        assert!((s.pooled.mean_like_over_other - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_empty_and_mixed_cutoffs() {
        assert!(explanation_stats(&[]).is_err());
        assert!(explanation_stats(&[bundle(30, vec![]), bundle(20, vec![])]).is_err());
    }
}
