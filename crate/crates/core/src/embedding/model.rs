use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::complex::{ComplexDiagonal, ComplexVector, TripleScorer};
use super::config::{RelationInit, TrainingConfig};
use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, NodeId, NodeKind, RelationType, Triple};
use crate::scalar::Scalar;

/// Entity and relation tables in one latent space.
///
/// Entity rows are stored per kind, indexed by node ordinal. Relations
/// without edges in the training graph have no vector.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel<T> {
    pub(crate) dimension: usize,
    pub(crate) entities: [Vec<T>; 3],
    pub(crate) relations: [Option<Vec<T>>; 6],
    pub(crate) config: TrainingConfig,
}

impl<T: Scalar> EmbeddingModel<T> {
    /// Seeded initial model for `graph`.
    ///
    /// Entries are uniform in `[-1/√(2D), 1/√(2D)]`, drawn users → items →
    /// aspects → relations; relations follow `config.relation_init`.
    pub fn initialize(graph: &KnowledgeGraph, config: &TrainingConfig) -> Self {
        let d = config.dimension;
        let bound = 1.0 / ((2 * d) as f64).sqrt();
        let (lo, hi) = (T::from_f64_lossy(-bound), T::from_f64_lossy(bound));
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut draw = |n: usize| -> Vec<T> { (0..n).map(|_| rng.random_range(lo..=hi)).collect() };
        let entities = NodeKind::ALL.map(|k| draw(graph.node_count(k) * 2 * d));
        let present = graph.present_relations();
        let mut relations: [Option<Vec<T>>; 6] = Default::default();
        for r in RelationType::ALL {
            if present.contains(&r) {
                relations[r.index()] = Some(match config.relation_init {
                    RelationInit::Identity => ComplexVector::<T>::ones(d).into_flat(),
                    RelationInit::Uniform => draw(2 * d),
                });
            }
        }
        Self {
            dimension: d,
            entities,
            relations,
            config: config.clone(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn config(&self) -> &TrainingConfig {
        &self.config
    }

    pub fn entity_count(&self, kind: NodeKind) -> usize {
        self.entities[kind.index()].len() / (2 * self.dimension)
    }

    pub fn contains(&self, node: NodeId) -> bool {
        (node.ordinal as usize) < self.entity_count(node.kind)
    }

    /// Flat `[re.., im..]` row of an entity.
    pub fn entity_row(&self, node: NodeId) -> Result<&[T]> {
        if !self.contains(node) {
            return Err(Error::UnknownNode {
                kind: node.kind.name(),
                key: format!("#{}", node.ordinal),
            });
        }
        let w = 2 * self.dimension;
        let start = node.ordinal as usize * w;
        Ok(&self.entities[node.kind.index()][start..start + w])
    }

    pub fn entity(&self, node: NodeId) -> Result<ComplexVector<T>> {
        self.entity_row(node).map(|r| ComplexVector::from_flat(r.to_vec()))
    }

    pub fn relation_row(&self, relation: RelationType) -> Result<&[T]> {
        self.relations[relation.index()]
            .as_deref()
            .ok_or_else(|| Error::UnknownRelation(relation.name().to_owned()))
    }

    pub fn relation(&self, relation: RelationType) -> Result<ComplexVector<T>> {
        self.relation_row(relation).map(|r| ComplexVector::from_flat(r.to_vec()))
    }

    pub fn relation_types(&self) -> Vec<RelationType> {
        RelationType::ALL
            .into_iter()
            .filter(|r| self.relations[r.index()].is_some())
            .collect()
    }

    /// Fitness of a triple.
    pub fn score_triple(&self, triple: &Triple) -> Result<T> {
        let s = self.entity_row(triple.source)?;
        let r = self.relation_row(triple.relation)?;
        let d = self.entity_row(triple.destination)?;
        Ok(ComplexDiagonal.score(s, r, d))
    }

    /// Checks that the entity tables line up with `graph`'s registries.
    pub fn check_compatible(&self, graph: &KnowledgeGraph) -> Result<()> {
        for kind in NodeKind::ALL {
            if self.entity_count(kind) != graph.node_count(kind) {
                return Err(Error::Config(format!(
                    "model has {} {kind} rows but graph has {} {kind} nodes",
                    self.entity_count(kind),
                    graph.node_count(kind)
                )));
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.entities.iter().flatten().all(|v| v.is_finite())
            && self.relations.iter().flatten().flatten().all(|v| v.is_finite())
    }

    /// Multiplies every entity entry by `factor`.
    pub fn scale_entities(&mut self, factor: T) {
        for v in self.entities.iter_mut().flatten() {
            *v *= factor;
        }
    }

    /// Overwrites one entity row.
    pub fn set_entity(&mut self, node: NodeId, value: &ComplexVector<T>) -> Result<()> {
        if value.dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                left: value.dimension(),
                right: self.dimension,
            });
        }
        self.entity_row(node)?;
        let w = 2 * self.dimension;
        let start = node.ordinal as usize * w;
        self.entities[node.kind.index()][start..start + w].copy_from_slice(value.as_flat());
        Ok(())
    }

    /// Model built from explicit tables; used by tests and tools.
    pub fn from_tables(
        dimension: usize,
        entities: [Vec<ComplexVector<T>>; 3],
        relations: Vec<(RelationType, ComplexVector<T>)>,
        config: TrainingConfig,
    ) -> Result<Self> {
        let mut tables: [Vec<T>; 3] = Default::default();
        for (table, rows) in tables.iter_mut().zip(entities) {
            for row in rows {
                if row.dimension() != dimension {
                    return Err(Error::DimensionMismatch {
                        left: row.dimension(),
                        right: dimension,
                    });
                }
                table.extend_from_slice(row.as_flat());
            }
        }
        let mut rel: [Option<Vec<T>>; 6] = Default::default();
        for (r, v) in relations {
            if v.dimension() != dimension {
                return Err(Error::DimensionMismatch {
                    left: v.dimension(),
                    right: dimension,
                });
            }
            rel[r.index()] = Some(v.into_flat());
        }
        Ok(Self {
            dimension,
            entities: tables,
            relations: rel,
            config: TrainingConfig {
                dimension,
                ..config
            },
        })
    }
}
