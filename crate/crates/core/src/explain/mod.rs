//! Aspect-level explanations for recommendations.
//!
//! A bundle gathers the aspect opinions that a user's nearest neighbours
//! expressed on aspects of the recommended items. Bundles are summarized by
//! [`explanation_stats`], review texts are annotated by
//! [`highlight_aspects`], and user embeddings are mapped to the plane by
//! [`project_users_2d`].

mod bundle;
mod highlight;
mod projection;
mod stats;

pub use bundle::{build_explanation, AspectCounts, ExplainOptions, ExplanationBundle, GatheredOpinion, Neighborhood, ScoredKey};
pub use highlight::{highlight_aspects, highlight_aspects_with, HighlightSpan, HighlightedReview, PolaritySign, SynonymLexicon};
pub use projection::{project_users_2d, project_with, PcaProjector, ProjectedUser, Projection2D, Projector};
pub use stats::{explanation_stats, ExplanationStats, PooledStats};
