use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use super::folds::{dedupe_ratings, FoldPlan};
use super::metrics::{metrics_at_k, Metrics};
use super::scorers::{FittedScorer, Recommender, TrainingFold, Universe};
use super::significance::{paired_bonferroni, PairedTest};
use crate::error::{Error, Result};
use crate::graph::{is_relevant, AspectOpinionRecord, NodeId, RatingRecord};
use crate::recommend::RankedList;

/// Ratings (one per user and item) and opinions under evaluation.
#[derive(Clone, Debug)]
pub struct EvalDataset {
    pub ratings: Vec<RatingRecord>,
    pub opinions: Vec<AspectOpinionRecord>,
    pub universe: Universe,
}

impl EvalDataset {
    /// Keeps the last rating of each (user, item) pair.
    pub fn new(ratings: &[RatingRecord], opinions: &[AspectOpinionRecord]) -> Self {
        let ratings = dedupe_ratings(ratings);
        let universe = Universe::from_ratings(&ratings);
        Self {
            ratings,
            opinions: opinions.to_vec(),
            universe,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalOptions {
    pub ks: Vec<usize>,
    /// Leave users without a relevant test item out of the means.
    pub skip_users_without_relevant: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            ks: vec![10, 20, 30],
            skip_users_without_relevant: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricsAtK {
    pub k: usize,
    pub mean_precision: f64,
    pub mean_recall: f64,
    #[serde(rename = "meanF1")]
    pub mean_f1: f64,
    #[serde(rename = "meanNDCG")]
    pub mean_ndcg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FoldReport {
    pub fold: usize,
    pub evaluated_users: usize,
    /// `None` when no user of the fold could be evaluated.
    pub metrics: Option<Vec<MetricsAtK>>,
    /// Evaluated users, by key.
    pub users: Vec<String>,
    /// `per_user_f1[k_index][user_index]`.
    #[serde(rename = "perUserF1")]
    pub per_user_f1: Vec<Vec<f64>>,
    pub cold_items: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelReport {
    pub name: String,
    pub folds: Vec<FoldReport>,
    /// Means over folds that evaluated at least one user.
    pub overall: Vec<MetricsAtK>,
}

impl ModelReport {
    pub fn mean_f1(&self, k: usize) -> Option<f64> {
        self.overall.iter().find(|m| m.k == k).map(|m| m.mean_f1)
    }

    /// Per-user F1 at `k` across all folds, fold by fold.
    pub fn pooled_f1(&self, k_index: usize) -> Vec<f64> {
        self.folds.iter().flat_map(|f| f.per_user_f1[k_index].iter().copied()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Comparison {
    pub k: usize,
    pub best: String,
    pub other: String,
    pub test: PairedTest,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricReport {
    pub fold_count: usize,
    pub seed: u64,
    pub ks: Vec<usize>,
    pub models: Vec<ModelReport>,
    /// Best model at each k against every other, Bonferroni over the others.
    pub significance: Vec<Comparison>,
}

impl MetricReport {
    pub fn model(&self, name: &str) -> Option<&ModelReport> {
        self.models.iter().find(|m| m.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Ranks `items` by `scorer`; ties by ascending ordinal.
pub fn rank_test_items(scorer: &dyn FittedScorer, user: u32, items: &[u32]) -> RankedList {
    let scores = scorer.score(user, items);
    let scored = items.iter().zip(scores).map(|(&i, s)| (NodeId::item(i), s)).collect();
    RankedList::from_scores(NodeId::user(user), items.len(), scored)
}

struct Split {
    fold: usize,
    train: Vec<RatingRecord>,
    opinions: Vec<AspectOpinionRecord>,
    /// (user, [(item, rating)]) in universe ordinals, users ascending.
    test: Vec<(u32, Vec<(u32, f64)>)>,
}

fn split(data: &EvalDataset, plan: &FoldPlan, fold: usize) -> Split {
    let mut train = Vec::new();
    let mut held_out = HashSet::new();
    let mut test: HashMap<u32, Vec<(u32, f64)>> = HashMap::new();
    for (r, &f) in data.ratings.iter().zip(&plan.assignment) {
        if f == fold {
            held_out.insert((r.user.as_str(), r.item.as_str()));
            let u = data.universe.users.get(&r.user).expect("universe covers ratings");
            let i = data.universe.items.get(&r.item).expect("universe covers ratings");
            test.entry(u).or_default().push((i, r.rating));
        } else {
            train.push(r.clone());
        }
    }
    let opinions = data
        .opinions
        .iter()
        .filter(|o| !held_out.contains(&(o.user.as_str(), o.item.as_str())))
        .cloned()
        .collect();
    let mut test: Vec<_> = test.into_iter().collect();
    test.sort_unstable_by_key(|(u, _)| *u);
    Split {
        fold,
        train,
        opinions,
        test,
    }
}

fn evaluate_fold(
    model: &dyn Recommender,
    data: &EvalDataset,
    split: &Split,
    options: &EvalOptions,
) -> Result<FoldReport> {
    let fold = TrainingFold {
        fold: split.fold,
        universe: &data.universe,
        ratings: split.train.clone(),
        opinions: split.opinions.clone(),
    };
    let scorer = model.fit(&fold)?;
    let ks = &options.ks;
    let mut sums = vec![Metrics::default(); ks.len()];
    let mut users = Vec::new();
    let mut per_user_f1 = vec![Vec::new(); ks.len()];
    let mut cold_items = 0;
    for (user, test) in &split.test {
        let relevant: HashSet<u32> = test.iter().filter(|(_, r)| is_relevant(*r)).map(|(i, _)| *i).collect();
        if relevant.is_empty() && options.skip_users_without_relevant {
            continue;
        }
        let items: Vec<u32> = test.iter().map(|(i, _)| *i).collect();
        cold_items += items.iter().filter(|&&i| scorer.is_cold(*user, i)).count();
        let ranked: Vec<u32> = rank_test_items(scorer.as_ref(), *user, &items)
            .nodes()
            .map(|n| n.ordinal)
            .collect();
        for (j, &k) in ks.iter().enumerate() {
            let m = metrics_at_k(&ranked, &relevant, k);
            sums[j].precision += m.precision;
            sums[j].recall += m.recall;
            sums[j].f1 += m.f1;
            sums[j].ndcg += m.ndcg;
            per_user_f1[j].push(m.f1);
        }
        users.push(data.universe.users.key(*user).to_owned());
    }
    let n = users.len();
    let metrics = (n > 0).then(|| {
        ks.iter()
            .zip(&sums)
            .map(|(&k, s)| MetricsAtK {
                k,
                mean_precision: s.precision / n as f64,
                mean_recall: s.recall / n as f64,
                mean_f1: s.f1 / n as f64,
                mean_ndcg: s.ndcg / n as f64,
            })
            .collect()
    });
    Ok(FoldReport {
        fold: split.fold,
        evaluated_users: n,
        metrics,
        users,
        per_user_f1,
        cold_items,
    })
}

fn overall(ks: &[usize], folds: &[FoldReport]) -> Vec<MetricsAtK> {
    let present: Vec<&Vec<MetricsAtK>> = folds.iter().filter_map(|f| f.metrics.as_ref()).collect();
    let n = present.len().max(1) as f64;
    ks.iter()
        .enumerate()
        .map(|(j, &k)| {
            let mean = |get: fn(&MetricsAtK) -> f64| present.iter().map(|m| get(&m[j])).sum::<f64>() / n;
            MetricsAtK {
                k,
                mean_precision: mean(|m| m.mean_precision),
                mean_recall: mean(|m| m.mean_recall),
                mean_f1: mean(|m| m.mean_f1),
                mean_ndcg: mean(|m| m.mean_ndcg),
            }
        })
        .collect()
}

/// Cross-validates every model on the same folds.
///
/// Each model is fitted per fold on that fold's training ratings and on the
/// opinions whose (user, item) pair is not held out; users are evaluated by
/// ranking their own test items.
pub fn evaluate(
    models: &[&dyn Recommender],
    data: &EvalDataset,
    plan: &FoldPlan,
    options: &EvalOptions,
) -> Result<MetricReport> {
    if plan.assignment.len() != data.ratings.len() {
        return Err(Error::Invalid(format!(
            "fold plan covers {} ratings, dataset has {}",
            plan.assignment.len(),
            data.ratings.len()
        )));
    }
    if options.ks.is_empty() || options.ks.contains(&0) {
        return Err(Error::Config("cutoffs must be positive".into()));
    }
    let splits: Vec<Split> = (0..plan.fold_count).map(|f| split(data, plan, f)).collect();

    let mut reports = Vec::with_capacity(models.len());
    for model in models {
        let folds = splits
            .par_iter()
            .map(|s| evaluate_fold(*model, data, s, options))
            .collect::<Result<Vec<_>>>()?;
        reports.push(ModelReport {
            name: model.name(),
            overall: overall(&options.ks, &folds),
            folds,
        });
    }

    let mut significance = Vec::new();
    if reports.len() > 1 {
        for (j, &k) in options.ks.iter().enumerate() {
            let best = (0..reports.len())
                .max_by(|&a, &b| reports[a].overall[j].mean_f1.total_cmp(&reports[b].overall[j].mean_f1).then(b.cmp(&a)))
                .expect("at least one model");
            let best_f1 = reports[best].pooled_f1(j);
            for (o, other) in reports.iter().enumerate() {
                if o == best || best_f1.len() < 2 {
                    continue;
                }
                significance.push(Comparison {
                    k,
                    best: reports[best].name.clone(),
                    other: other.name.clone(),
                    test: paired_bonferroni(&best_f1, &other.pooled_f1(j), reports.len() - 1)?,
                });
            }
        }
    }
    Ok(MetricReport {
        fold_count: plan.fold_count,
        seed: plan.seed,
        ks: options.ks.clone(),
        models: reports,
        significance,
    })
}
