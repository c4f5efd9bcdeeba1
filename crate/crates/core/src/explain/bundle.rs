use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, NodeId, NodeKind, RelationType};
use crate::recommend::{cosine, nearest_users, recommend_top_n, sort_ranked};
use crate::scalar::Scalar;

/// How the neighbourhood of the subject is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum Neighborhood {
    /// The `k` users closest to the subject.
    Nearest(usize),
    /// An explicit selection, ranked by similarity to the subject.
    Users(Vec<NodeId>),
}

impl Default for Neighborhood {
    fn default() -> Self {
        Neighborhood::Nearest(20)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExplainOptions {
    pub cutoff: usize,
    pub neighborhood: Neighborhood,
    /// Drop items the subject already rated from the recommendations.
    pub exclude_seen: bool,
}

impl Default for ExplainOptions {
    fn default() -> Self {
        Self {
            cutoff: 30,
            neighborhood: Neighborhood::default(),
            exclude_seen: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredKey {
    pub key: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GatheredOpinion {
    pub neighbor: String,
    pub aspect: String,
    pub relation: RelationType,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AspectCounts {
    pub like: usize,
    pub dislike: usize,
    pub does_not_care: usize,
}

impl AspectCounts {
    pub(crate) fn add(&mut self, relation: RelationType) {
        match relation {
            RelationType::Like => self.like += 1,
            RelationType::Dislike => self.dislike += 1,
            RelationType::DoesNotCare => self.does_not_care += 1,
            _ => {}
        }
    }

    pub(crate) fn merge(&mut self, other: AspectCounts) {
        self.like += other.like;
        self.dislike += other.dislike;
        self.does_not_care += other.does_not_care;
    }
}

/// Neighbour opinions on the aspects of one user's recommendations.
///
/// `per_item` only has keys for recommended items with at least one gathered
/// opinion. Each (neighbour, aspect, relation) appears once per item, in
/// neighbour rank order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExplanationBundle {
    pub subject: String,
    pub cutoff: usize,
    pub recommended: Vec<ScoredKey>,
    pub neighbors: Vec<ScoredKey>,
    pub per_item: BTreeMap<String, Vec<GatheredOpinion>>,
    pub subject_aspect_profile: BTreeMap<String, AspectCounts>,
}

impl ExplanationBundle {
    pub fn covered_items(&self) -> usize {
        self.per_item.values().filter(|v| !v.is_empty()).count()
    }

    pub fn opinions(&self) -> impl Iterator<Item = (&str, &GatheredOpinion)> + '_ {
        self.per_item
            .iter()
            .flat_map(|(item, ops)| ops.iter().map(move |o| (item.as_str(), o)))
    }
}

pub fn build_explanation<T: Scalar>(
    model: &EmbeddingModel<T>,
    graph: &KnowledgeGraph,
    user: NodeId,
    options: &ExplainOptions,
) -> Result<ExplanationBundle> {
    if options.cutoff == 0 {
        return Err(Error::Invalid("explanation cutoff must be at least 1".into()));
    }
    if user.kind != NodeKind::User || user.ordinal as usize >= graph.node_count(NodeKind::User) {
        return Err(Error::UnknownNode {
            kind: "user",
            key: format!("#{}", user.ordinal),
        });
    }
    let recommended = recommend_top_n(model, graph, user, options.cutoff, options.exclude_seen)?;
    let neighbors = match &options.neighborhood {
        Neighborhood::Nearest(k) => nearest_users(model, user, *k)?
            .entries
            .into_iter()
            .map(|e| (e.node, e.score))
            .collect::<Vec<_>>(),
        Neighborhood::Users(selection) => {
            let subject = model.entity_row(user)?;
            let mut seen = HashSet::new();
            let mut scored = Vec::new();
            for &n in selection {
                if n.kind != NodeKind::User || n == user || !seen.insert(n) {
                    continue;
                }
                scored.push((n, cosine(subject, model.entity_row(n)?)?));
            }
            sort_ranked(&mut scored);
            scored
        }
    };

    let rank_of: HashMap<u32, usize> = recommended
        .nodes()
        .enumerate()
        .map(|(rank, n)| (n.ordinal, rank))
        .collect();
    let mut per_item: BTreeMap<String, Vec<GatheredOpinion>> = BTreeMap::new();
    let mut recorded = HashSet::new();
    for &(neighbor, _) in &neighbors {
        if neighbor.ordinal as usize >= graph.node_count(NodeKind::User) {
            continue;
        }
        for edge in graph.user_opinion_edges(neighbor.ordinal) {
            let aspect = edge.triple.destination.ordinal;
            for &item in graph.aspect_items(aspect) {
                if !rank_of.contains_key(&item) || !recorded.insert((item, neighbor.ordinal, aspect, edge.triple.relation)) {
                    continue;
                }
                per_item
                    .entry(graph.key(NodeId::item(item)).to_owned())
                    .or_default()
                    .push(GatheredOpinion {
                        neighbor: graph.key(neighbor).to_owned(),
                        aspect: graph.key(NodeId::aspect(aspect)).to_owned(),
                        relation: edge.triple.relation,
                    });
            }
        }
    }

    let mut profile: BTreeMap<String, AspectCounts> = BTreeMap::new();
    for edge in graph.user_opinion_edges(user.ordinal) {
        profile
            .entry(graph.key(edge.triple.destination).to_owned())
            .or_default()
            .add(edge.triple.relation);
    }

    let keyed = |pairs: Vec<(NodeId, f64)>| {
        pairs
            .into_iter()
            .map(|(n, score)| ScoredKey {
                key: graph.key(n).to_owned(),
                score,
            })
            .collect()
    };
    Ok(ExplanationBundle {
        subject: graph.key(user).to_owned(),
        cutoff: options.cutoff,
        recommended: keyed(recommended.entries.into_iter().map(|e| (e.node, e.score)).collect()),
        neighbors: keyed(neighbors),
        per_item,
        subject_aspect_profile: profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{ComplexVector, TrainingConfig};
    use crate::graph::{AspectOpinionRecord, GraphVariant, RatingRecord};

    fn row(v: [f32; 2]) -> ComplexVector<f32> {
        ComplexVector::from_flat(vec![v[0], v[1]])
    }

    /// u0 is the subject; u1 is close to it, u2 far away. i0 and i1 are
    /// recommended (cutoff 2), i2 is not.
    fn fixture() -> (EmbeddingModel<f32>, KnowledgeGraph) {
        let ratings = vec![
            RatingRecord::new("u0", "i9", 5.0),
            RatingRecord::new("u1", "i0", 4.0),
            RatingRecord::new("u2", "i1", 4.0),
            RatingRecord::new("u2", "i2", 2.0),
        ];
        let opinions = vec![
            AspectOpinionRecord::new("u1", "i0", "battery", 1.0),
            AspectOpinionRecord::new("u1", "i2", "screen", -1.0),
            AspectOpinionRecord::new("u2", "i1", "price", -1.0),
            AspectOpinionRecord::new("u0", "i9", "battery", 1.0),
            AspectOpinionRecord::new("u0", "i9", "size", 0.0),
        ];
        let g = KnowledgeGraph::build(&ratings, &opinions, GraphVariant::Gera).0;
        let users = vec![row([1.0, 0.0]), row([0.9, 0.1]), row([-1.0, 0.2])];
        let items = vec![
            row([0.0, 1.0]), // i9
            row([1.0, 0.0]), // i0
            row([0.8, 0.2]), // i1
            row([-1.0, 0.0]), // i2
        ];
        let aspects = vec![row([0.0, 0.0]); g.node_count(NodeKind::Aspect)];
        let m = EmbeddingModel::from_tables(1, [users, items, aspects], vec![], TrainingConfig::default()).unwrap();
        (m, g)
    }

    #[test]
    fn single_path_gathering() {
        let (m, g) = fixture();
        let opts = ExplainOptions {
            cutoff: 2,
            neighborhood: Neighborhood::Nearest(1),
            ..Default::default()
        };
        let b = build_explanation(&m, &g, NodeId::user(0), &opts).unwrap();
        assert_eq!(b.recommended.iter().map(|s| s.key.as_str()).collect::<Vec<_>>(), ["i0", "i1"]);
        assert_eq!(b.neighbors[0].key, "u1");
        assert_eq!(b.per_item.len(), 1);
        assert_eq!(
            b.per_item["i0"],
            vec![GatheredOpinion {
                neighbor: "u1".into(),
                aspect: "battery".into(),
                relation: RelationType::Like
            }]
        );
        assert_eq!(b.subject_aspect_profile["battery"].like, 1);
        assert_eq!(b.subject_aspect_profile["size"].does_not_care, 1);
    }

    #[test]
    fn explicit_users() {
        let (m, g) = fixture();
        let opts = ExplainOptions {
            cutoff: 2,
            neighborhood: Neighborhood::Users(vec![NodeId::user(2), NodeId::user(0), NodeId::user(2)]),
            ..Default::default()
        };
        let b = build_explanation(&m, &g, NodeId::user(0), &opts).unwrap();
        assert_eq!(b.neighbors.len(), 1);
        assert_eq!(b.per_item.keys().collect::<Vec<_>>(), ["i1"]);
        assert_eq!(b.covered_items(), 1);
    }

    #[test]
    fn no_neighbour_opinions() {
        let (m, g) = fixture();
        let opts = ExplainOptions {
            cutoff: 2,
            neighborhood: Neighborhood::Users(vec![]),
            ..Default::default()
        };
        let b = build_explanation(&m, &g, NodeId::user(0), &opts).unwrap();
        assert!(b.per_item.is_empty());
    }

    #[test]
    fn errors() {
        let (m, g) = fixture();
        assert!(build_explanation(&m, &g, NodeId::user(9), &ExplainOptions::default()).is_err());
        let zero = ExplainOptions {
            cutoff: 0,
            ..Default::default()
        };
        assert!(build_explanation(&m, &g, NodeId::user(0), &zero).is_err());
    }
}
