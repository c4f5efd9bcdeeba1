//! Cross-validated top-N evaluation against baselines.

mod folds;
mod metrics;
mod protocol;
mod scorers;
mod significance;

pub use folds::{dedupe_ratings, kfold_split, FoldPlan};
pub use metrics::{metrics_at_k, relevance_labels, Metrics};
pub use protocol::{
    evaluate, rank_test_items, Comparison, EvalDataset, EvalOptions, FoldReport, MetricReport, MetricsAtK,
    ModelReport,
};
pub use scorers::{
    EmbeddingRecommender, FittedScorer, OracleScorer, PopularityBaseline, RandomBaseline, Recommender,
    TrainingFold, Universe,
};
pub use significance::{paired_bonferroni, PairedTest, SIGNIFICANCE_LEVEL};
