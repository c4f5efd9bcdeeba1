use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum BatchOrder {
    /// Reshuffle edges every epoch with the run seed.
    Shuffled,
    /// Visit edges in graph order.
    FileOrder,
}

/// How relation vectors start out. Entity vectors are always drawn uniformly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RelationInit {
    /// Every component `1 + 0i`: the transformation starts as the identity.
    Identity,
    /// Same uniform draw as entities.
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrainingConfig {
    /// Complex dimension D; vectors hold 2D reals.
    pub dimension: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub margin: f64,
    /// Half corrupt one endpoint of the positive, half are fully random.
    pub negatives_per_positive: usize,
    pub seed: u64,
    pub partitions: usize,
    pub batch_order: BatchOrder,
    pub relation_init: RelationInit,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            dimension: 400,
            learning_rate: 0.01,
            epochs: 5,
            margin: 0.1,
            negatives_per_positive: 10,
            seed: 0,
            partitions: 1,
            batch_order: BatchOrder::Shuffled,
            relation_init: RelationInit::Identity,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_owned()));
        if self.dimension == 0 {
            return fail("dimension must be positive");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return fail("learning rate must be finite and non-negative");
        }
        if self.epochs == 0 {
            return fail("epochs must be positive");
        }
        if !(self.margin.is_finite() && self.margin >= 0.0) {
            return fail("margin must be finite and non-negative");
        }
        if self.negatives_per_positive == 0 || !self.negatives_per_positive.is_multiple_of(2) {
            return fail("negatives per positive must be a positive even number");
        }
        if self.partitions == 0 {
            return fail("partitions must be positive");
        }
        Ok(())
    }
}
