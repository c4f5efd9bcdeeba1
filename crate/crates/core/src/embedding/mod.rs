//! Complex-valued knowledge graph embeddings.

mod checkpoint;
mod complex;
mod config;
mod loss;
mod model;
mod partition;
mod sampling;
mod train;

pub use checkpoint::{checkpoint_len, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use complex::{complex_similarity, score_vectors, transform, ComplexDiagonal, ComplexVector, TripleScorer};
pub use config::{BatchOrder, RelationInit, TrainingConfig};
pub use loss::{gradient_step, hinge_gradients, hinge_loss, margin_loss, HingeOutcome, TripleSlots};
pub use model::EmbeddingModel;
pub(crate) use partition::splitmix64;
pub use partition::{partition_for, partition_schedule, Bucket, BucketSchedule};
pub use sampling::{corrupt, sample_negatives, sample_negatives_from, Endpoint, KindPools};
pub use train::{train, train_with, EpochStats, TrainingOutcome};
