//! Scoring models compared by the evaluation protocol.
//!
//! A [`Recommender`] is fitted once per fold on that fold's training
//! records and returns a [`FittedScorer`] over the dataset-wide ordinals of
//! [`Universe`].

use std::collections::HashMap;

use crate::embedding::{splitmix64, train, EmbeddingModel, TrainingConfig};
use crate::error::Result;
use crate::graph::{AspectOpinionRecord, GraphVariant, KnowledgeGraph, NodeKind, NodeRegistry, RatingRecord};
use crate::recommend::cosine;

/// Users and items of the full rating set, in file order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Universe {
    pub users: NodeRegistry,
    pub items: NodeRegistry,
}

impl Universe {
    pub fn from_ratings(ratings: &[RatingRecord]) -> Self {
        let mut u = Self::default();
        for r in ratings {
            u.users.intern(&r.user);
            u.items.intern(&r.item);
        }
        u
    }
}

pub struct TrainingFold<'a> {
    pub fold: usize,
    pub universe: &'a Universe,
    pub ratings: Vec<RatingRecord>,
    pub opinions: Vec<AspectOpinionRecord>,
}

pub trait FittedScorer: Send + Sync {
    /// Scores of `items` for `user`, in input order.
    fn score(&self, user: u32, items: &[u32]) -> Vec<f64>;

    /// Whether `item` had to be scored without a learned representation.
    fn is_cold(&self, _user: u32, _item: u32) -> bool {
        false
    }
}

pub trait Recommender: Send + Sync {
    fn name(&self) -> String;
    fn fit(&self, fold: &TrainingFold<'_>) -> Result<Box<dyn FittedScorer>>;
}

/// Seeded uniform scores (RDM).
#[derive(Clone, Debug)]
pub struct RandomBaseline {
    pub seed: u64,
}

struct RandomScores {
    seed: u64,
}

impl FittedScorer for RandomScores {
    fn score(&self, user: u32, items: &[u32]) -> Vec<f64> {
        items
            .iter()
            .map(|&i| {
                let h = splitmix64(self.seed ^ splitmix64(((user as u64) << 32) | i as u64));
                (h >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect()
    }
}

impl Recommender for RandomBaseline {
    fn name(&self) -> String {
        "RDM".into()
    }

    fn fit(&self, fold: &TrainingFold<'_>) -> Result<Box<dyn FittedScorer>> {
        Ok(Box::new(RandomScores {
            seed: splitmix64(self.seed.wrapping_add(fold.fold as u64)),
        }))
    }
}

/// Number of training ratings per item (POP).
#[derive(Clone, Debug, Default)]
pub struct PopularityBaseline;

struct Counts(Vec<f64>);

impl FittedScorer for Counts {
    fn score(&self, _user: u32, items: &[u32]) -> Vec<f64> {
        items.iter().map(|&i| self.0.get(i as usize).copied().unwrap_or(0.0)).collect()
    }
}

impl Recommender for PopularityBaseline {
    fn name(&self) -> String {
        "POP".into()
    }

    fn fit(&self, fold: &TrainingFold<'_>) -> Result<Box<dyn FittedScorer>> {
        let mut counts = vec![0.0; fold.universe.items.len()];
        for r in &fold.ratings {
            if let Some(i) = fold.universe.items.get(&r.item) {
                counts[i as usize] += 1.0;
            }
        }
        Ok(Box::new(Counts(counts)))
    }
}

/// Embeddings trained on the fold's graph, ranked by cosine proximity.
#[derive(Clone, Debug)]
pub struct EmbeddingRecommender {
    pub variant: GraphVariant,
    pub config: TrainingConfig,
}

struct EmbeddingScores {
    model: EmbeddingModel<f32>,
    users: Vec<Option<u32>>,
    items: Vec<Option<u32>>,
}

impl EmbeddingScores {
    fn rows(&self, user: u32, item: u32) -> Option<(&[f32], &[f32])> {
        let u = self.users[user as usize]?;
        let i = self.items[item as usize]?;
        let w = 2 * self.model.dimension;
        let ut = &self.model.entities[NodeKind::User.index()];
        let it = &self.model.entities[NodeKind::Item.index()];
        Some((&ut[u as usize * w..(u as usize + 1) * w], &it[i as usize * w..(i as usize + 1) * w]))
    }
}

impl FittedScorer for EmbeddingScores {
    fn score(&self, user: u32, items: &[u32]) -> Vec<f64> {
        items
            .iter()
            .map(|&i| match self.rows(user, i) {
                Some((u, v)) => cosine(u, v).expect("rows share the model width"),
                None => 0.0,
            })
            .collect()
    }

    fn is_cold(&self, user: u32, item: u32) -> bool {
        self.rows(user, item).is_none()
    }
}

impl Recommender for EmbeddingRecommender {
    fn name(&self) -> String {
        self.variant.name().into()
    }

    fn fit(&self, fold: &TrainingFold<'_>) -> Result<Box<dyn FittedScorer>> {
        let (graph, _) = KnowledgeGraph::build(&fold.ratings, &fold.opinions, self.variant);
        let config = TrainingConfig {
            seed: self.config.seed.wrapping_add(fold.fold as u64),
            ..self.config.clone()
        };
        let model = train::<f32>(&graph, &config)?.model;
        let map = |registry: &NodeRegistry, kind| {
            registry
                .keys()
                .iter()
                .map(|k| graph.node(kind, k).map(|n| n.ordinal))
                .collect()
        };
        Ok(Box::new(EmbeddingScores {
            users: map(&fold.universe.users, NodeKind::User),
            items: map(&fold.universe.items, NodeKind::Item),
            model,
        }))
    }
}

/// Scores every pair by its true rating: the ceiling of the protocol.
#[derive(Clone, Debug, Default)]
pub struct OracleScorer {
    ratings: HashMap<(String, String), f64>,
}

impl OracleScorer {
    pub fn new(ratings: &[RatingRecord]) -> Self {
        Self {
            ratings: ratings.iter().map(|r| ((r.user.clone(), r.item.clone()), r.rating)).collect(),
        }
    }
}

struct OracleScores(HashMap<(u32, u32), f64>);

impl FittedScorer for OracleScores {
    fn score(&self, user: u32, items: &[u32]) -> Vec<f64> {
        items.iter().map(|&i| self.0.get(&(user, i)).copied().unwrap_or(0.0)).collect()
    }
}

impl Recommender for OracleScorer {
    fn name(&self) -> String {
        "ORACLE".into()
    }

    fn fit(&self, fold: &TrainingFold<'_>) -> Result<Box<dyn FittedScorer>> {
        let u = fold.universe;
        Ok(Box::new(OracleScores(
            self.ratings
                .iter()
                .filter_map(|((user, item), &r)| Some(((u.users.get(user)?, u.items.get(item)?), r)))
                .collect(),
        )))
    }
}
