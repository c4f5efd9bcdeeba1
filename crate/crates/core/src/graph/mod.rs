//! The tripartite user/item/aspect knowledge graph.
//!
//! Ratings become `highRating`/`lowRating` user→item edges. Each aspect
//! opinion becomes a `like`/`dislike`/`doesNotCare` user→aspect edge plus a
//! `belongsTo` aspect→item edge, the latter deduplicated per (aspect, item).
//! A [`GraphVariant`] decides which of the six relations are admitted.

mod format;
mod io;
mod records;
mod stats;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use format::{read_graph, write_graph, GRAPH_FORMAT_VERSION};
pub use io::{
    load_dataset, parse_opinions, parse_ratings, parse_reviews, write_opinions, Dataset,
    LoadOptions, LoadWarning, ReviewIndex,
};
pub use records::{
    is_relevant, map_polarity_to_relation, map_rating_to_relation, normalize_aspect,
    AspectOpinionRecord, RatingRecord, RATING_THRESHOLD,
};
pub use stats::{graph_stats, GraphStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    User,
    Item,
    Aspect,
}

impl NodeKind {
    pub const ALL: [NodeKind; 3] = [NodeKind::User, NodeKind::Item, NodeKind::Aspect];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            NodeKind::User => "user",
            NodeKind::Item => "item",
            NodeKind::Aspect => "aspect",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A node handle: its kind plus the dense ordinal assigned at ingestion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId {
    pub kind: NodeKind,
    pub ordinal: u32,
}

impl NodeId {
    pub fn new(kind: NodeKind, ordinal: u32) -> Self {
        Self { kind, ordinal }
    }

    pub fn user(ordinal: u32) -> Self {
        Self::new(NodeKind::User, ordinal)
    }

    pub fn item(ordinal: u32) -> Self {
        Self::new(NodeKind::Item, ordinal)
    }

    pub fn aspect(ordinal: u32) -> Self {
        Self::new(NodeKind::Aspect, ordinal)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RelationType {
    Like,
    Dislike,
    DoesNotCare,
    BelongsTo,
    HighRating,
    LowRating,
}

impl RelationType {
    pub const ALL: [RelationType; 6] = [
        RelationType::Like,
        RelationType::Dislike,
        RelationType::DoesNotCare,
        RelationType::BelongsTo,
        RelationType::HighRating,
        RelationType::LowRating,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    /// Legal (source kind, destination kind) for edges of this relation.
    pub fn endpoints(self) -> (NodeKind, NodeKind) {
        match self {
            RelationType::Like | RelationType::Dislike | RelationType::DoesNotCare => {
                (NodeKind::User, NodeKind::Aspect)
            }
            RelationType::BelongsTo => (NodeKind::Aspect, NodeKind::Item),
            RelationType::HighRating | RelationType::LowRating => (NodeKind::User, NodeKind::Item),
        }
    }

    pub fn is_rating(self) -> bool {
        matches!(self, RelationType::HighRating | RelationType::LowRating)
    }

    pub fn is_opinion(self) -> bool {
        matches!(
            self,
            RelationType::Like | RelationType::Dislike | RelationType::DoesNotCare
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            RelationType::Like => "like",
            RelationType::Dislike => "dislike",
            RelationType::DoesNotCare => "doesNotCare",
            RelationType::BelongsTo => "belongsTo",
            RelationType::HighRating => "highRating",
            RelationType::LowRating => "lowRating",
        }
    }
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RelationType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Invalid(format!("unknown relation `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub source: NodeId,
    pub relation: RelationType,
    pub destination: NodeId,
}

impl Triple {
    pub fn new(source: NodeId, relation: RelationType, destination: NodeId) -> Self {
        Self {
            source,
            relation,
            destination,
        }
    }

    pub fn is_kind_legal(&self) -> bool {
        let (src, dst) = self.relation.endpoints();
        self.source.kind == src && self.destination.kind == dst
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GraphVariant {
    /// Rating relations only.
    #[serde(rename = "GER")]
    Ger,
    /// Aspect-opinion relations only.
    #[serde(rename = "GEA")]
    Gea,
    /// Both.
    #[serde(rename = "GERA")]
    Gera,
}

impl GraphVariant {
    pub fn admits(self, relation: RelationType) -> bool {
        match self {
            GraphVariant::Ger => relation.is_rating(),
            GraphVariant::Gea => !relation.is_rating(),
            GraphVariant::Gera => true,
        }
    }

    pub fn relations(self) -> Vec<RelationType> {
        RelationType::ALL
            .into_iter()
            .filter(|r| self.admits(*r))
            .collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            GraphVariant::Ger => "GER",
            GraphVariant::Gea => "GEA",
            GraphVariant::Gera => "GERA",
        }
    }
}

impl fmt::Display for GraphVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GraphVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "GER" => Ok(GraphVariant::Ger),
            "GEA" => Ok(GraphVariant::Gea),
            "GERA" => Ok(GraphVariant::Gera),
            _ => Err(Error::Invalid(format!("unknown graph variant `{s}`"))),
        }
    }
}

/// Back-reference from an edge to the record that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Rating { record: usize, value: f64 },
    /// `item` is the ordinal of the item the opinion was written about.
    Opinion { record: usize, item: u32, polarity: f64 },
    /// First opinion record that introduced this (aspect, item) pair.
    BelongsTo { record: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub triple: Triple,
    pub provenance: Provenance,
}

/// Bijection between text keys and dense ordinals for one node kind.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NodeRegistry {
    keys: Vec<String>,
    index: HashMap<String, u32>,
}

impl NodeRegistry {
    pub fn intern(&mut self, key: &str) -> u32 {
        if let Some(&ordinal) = self.index.get(key) {
            return ordinal;
        }
        let ordinal = self.keys.len() as u32;
        self.keys.push(key.to_owned());
        self.index.insert(key.to_owned(), ordinal);
        ordinal
    }

    pub fn get(&self, key: &str) -> Option<u32> {
        self.index.get(key).copied()
    }

    pub fn key(&self, ordinal: u32) -> &str {
        &self.keys[ordinal as usize]
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
struct Adjacency {
    /// user → indices of rating edges leaving the user
    user_ratings: Vec<Vec<usize>>,
    /// user → indices of opinion edges leaving the user
    user_opinions: Vec<Vec<usize>>,
    /// item → rating edges and opinion edges written about the item
    item_interactions: Vec<Vec<usize>>,
    /// aspect → items it belongs to
    aspect_items: Vec<Vec<u32>>,
    /// item → aspects that belong to it
    item_aspects: Vec<Vec<u32>>,
}

/// Immutable knowledge graph.
///
/// Edges are stored grouped by relation in [`RelationType::ALL`] order; within
/// a group, in source-record order.
#[derive(Clone, Debug, PartialEq)]
pub struct KnowledgeGraph {
    variant: GraphVariant,
    registries: [NodeRegistry; 3],
    edges: Vec<Edge>,
    groups: [Range<usize>; 6],
    adjacency: Adjacency,
}

impl KnowledgeGraph {
    /// Builds the graph for `variant`.
    ///
    /// Records that fail validation are skipped and returned alongside the
    /// graph. Duplicate (user, item) ratings keep the last occurrence; exact
    /// duplicate opinion tuples keep the first.
    pub fn build(
        ratings: &[RatingRecord],
        opinions: &[AspectOpinionRecord],
        variant: GraphVariant,
    ) -> (Self, Vec<Error>) {
        let mut registries: [NodeRegistry; 3] = Default::default();
        let mut groups: [Vec<Edge>; 6] = Default::default();
        let mut rejected = Vec::new();

        if variant.admits(RelationType::HighRating) {
            let mut last = HashMap::new();
            for (index, r) in ratings.iter().enumerate() {
                last.insert((r.user.as_str(), r.item.as_str()), index);
            }
            for (index, r) in ratings.iter().enumerate() {
                let relation = match map_rating_to_relation(r.rating, index) {
                    Ok(relation) => relation,
                    Err(e) => {
                        rejected.push(e);
                        continue;
                    }
                };
                if last[&(r.user.as_str(), r.item.as_str())] != index {
                    continue;
                }
                let user = registries[0].intern(&r.user);
                let item = registries[1].intern(&r.item);
                groups[relation.index()].push(Edge {
                    triple: Triple::new(NodeId::user(user), relation, NodeId::item(item)),
                    provenance: Provenance::Rating {
                        record: index,
                        value: r.rating,
                    },
                });
            }
        }

        if variant.admits(RelationType::BelongsTo) {
            let mut seen_tuples = HashSet::new();
            let mut seen_pairs = HashSet::new();
            for (index, o) in opinions.iter().enumerate() {
                let relation = match map_polarity_to_relation(o.polarity, index) {
                    Ok(relation) => relation,
                    Err(e) => {
                        rejected.push(e);
                        continue;
                    }
                };
                let aspect_key = normalize_aspect(&o.aspect);
                if aspect_key.is_empty() {
                    rejected.push(Error::EmptyAspect { index });
                    continue;
                }
                let tuple = (
                    o.user.clone(),
                    o.item.clone(),
                    aspect_key.clone(),
                    o.polarity.to_bits(),
                );
                if !seen_tuples.insert(tuple) {
                    continue;
                }
                let user = registries[0].intern(&o.user);
                let item = registries[1].intern(&o.item);
                let aspect = registries[2].intern(&aspect_key);
                groups[relation.index()].push(Edge {
                    triple: Triple::new(NodeId::user(user), relation, NodeId::aspect(aspect)),
                    provenance: Provenance::Opinion {
                        record: index,
                        item,
                        polarity: o.polarity,
                    },
                });
                if seen_pairs.insert((aspect, item)) {
                    groups[RelationType::BelongsTo.index()].push(Edge {
                        triple: Triple::new(
                            NodeId::aspect(aspect),
                            RelationType::BelongsTo,
                            NodeId::item(item),
                        ),
                        provenance: Provenance::BelongsTo { record: index },
                    });
                }
            }
        }

        (Self::from_parts(variant, registries, groups), rejected)
    }

    pub(crate) fn from_parts(
        variant: GraphVariant,
        registries: [NodeRegistry; 3],
        groups: [Vec<Edge>; 6],
    ) -> Self {
        let mut edges = Vec::with_capacity(groups.iter().map(Vec::len).sum());
        let mut ranges: [Range<usize>; 6] = Default::default();
        for (slot, group) in ranges.iter_mut().zip(groups) {
            let start = edges.len();
            edges.extend(group);
            *slot = start..edges.len();
        }
        let adjacency = Self::index(&registries, &edges);
        Self {
            variant,
            registries,
            edges,
            groups: ranges,
            adjacency,
        }
    }

    fn index(registries: &[NodeRegistry; 3], edges: &[Edge]) -> Adjacency {
        let mut adj = Adjacency {
            user_ratings: vec![Vec::new(); registries[0].len()],
            user_opinions: vec![Vec::new(); registries[0].len()],
            item_interactions: vec![Vec::new(); registries[1].len()],
            aspect_items: vec![Vec::new(); registries[2].len()],
            item_aspects: vec![Vec::new(); registries[1].len()],
        };
        for (i, edge) in edges.iter().enumerate() {
            let t = edge.triple;
            let (src, dst) = (t.source.ordinal as usize, t.destination.ordinal as usize);
            match t.relation {
                RelationType::HighRating | RelationType::LowRating => {
                    adj.user_ratings[src].push(i);
                    adj.item_interactions[dst].push(i);
                }
                RelationType::BelongsTo => {
                    adj.aspect_items[src].push(dst as u32);
                    adj.item_aspects[dst].push(src as u32);
                }
                _ => {
                    adj.user_opinions[src].push(i);
                    if let Provenance::Opinion { item, .. } = edge.provenance {
                        adj.item_interactions[item as usize].push(i);
                    }
                }
            }
        }
        adj
    }

    pub fn variant(&self) -> GraphVariant {
        self.variant
    }

    pub fn registry(&self, kind: NodeKind) -> &NodeRegistry {
        &self.registries[kind.index()]
    }

    pub fn node_count(&self, kind: NodeKind) -> usize {
        self.registries[kind.index()].len()
    }

    pub fn node(&self, kind: NodeKind, key: &str) -> Option<NodeId> {
        self.registry(kind).get(key).map(|o| NodeId::new(kind, o))
    }

    /// Like [`node`](Self::node) but reports the missing key as an error.
    pub fn require(&self, kind: NodeKind, key: &str) -> Result<NodeId> {
        self.node(kind, key).ok_or_else(|| Error::UnknownNode {
            kind: kind.name(),
            key: key.to_owned(),
        })
    }

    pub fn key(&self, node: NodeId) -> &str {
        self.registry(node.kind).key(node.ordinal)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edges_of(&self, relation: RelationType) -> &[Edge] {
        &self.edges[self.groups[relation.index()].clone()]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Relations that have at least one edge.
    pub fn present_relations(&self) -> Vec<RelationType> {
        RelationType::ALL
            .into_iter()
            .filter(|r| !self.groups[r.index()].is_empty())
            .collect()
    }

    /// Rating edges leaving `user`.
    pub fn user_rating_edges(&self, user: u32) -> impl Iterator<Item = &Edge> + '_ {
        self.adjacency.user_ratings[user as usize]
            .iter()
            .map(|&i| &self.edges[i])
    }

    /// Items `user` has a rating edge to.
    pub fn rated_items(&self, user: u32) -> impl Iterator<Item = u32> + '_ {
        self.user_rating_edges(user).map(|e| e.triple.destination.ordinal)
    }

    /// Opinion (like / dislike / doesNotCare) edges leaving `user`.
    pub fn user_opinion_edges(&self, user: u32) -> impl Iterator<Item = &Edge> + '_ {
        self.adjacency.user_opinions[user as usize]
            .iter()
            .map(|&i| &self.edges[i])
    }

    /// Rating edges into `item` and opinion edges written about it.
    pub fn item_interactions(&self, item: u32) -> impl Iterator<Item = &Edge> + '_ {
        self.adjacency.item_interactions[item as usize]
            .iter()
            .map(|&i| &self.edges[i])
    }

    /// Users with a rating or an opinion on `item`, ascending by ordinal.
    pub fn raters_of(&self, item: u32) -> Vec<u32> {
        let mut users: Vec<u32> = self
            .item_interactions(item)
            .map(|e| e.triple.source.ordinal)
            .collect();
        users.sort_unstable();
        users.dedup();
        users
    }

    pub fn aspect_items(&self, aspect: u32) -> &[u32] {
        &self.adjacency.aspect_items[aspect as usize]
    }

    pub fn item_aspects(&self, item: u32) -> &[u32] {
        &self.adjacency.item_aspects[item as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn figure_one() -> (Vec<RatingRecord>, Vec<AspectOpinionRecord>) {
        let ratings = vec![
            RatingRecord::new("user1", "item1", 2.0),
            RatingRecord::new("user2", "item1", 5.0),
        ];
        let opinions = vec![
            AspectOpinionRecord::new("user1", "item1", "aspect1", 1.0),
            AspectOpinionRecord::new("user2", "item1", "aspect1", -1.0),
            AspectOpinionRecord::new("user3", "item1", "aspect2", 0.0),
        ];
        (ratings, opinions)
    }

    #[test]
    fn single_opinion_under_gea() {
        let opinions = vec![AspectOpinionRecord::new("u1", "i1", "a1", 1.0)];
        let (g, rejected) = KnowledgeGraph::build(&[], &opinions, GraphVariant::Gea);
        assert!(rejected.is_empty());
        assert_eq!(g.edge_count(), 2);
        let node_total: usize = NodeKind::ALL.iter().map(|k| g.node_count(*k)).sum();
        assert_eq!(node_total, 3);
        assert_eq!(g.edges_of(RelationType::Like)[0].triple.destination, NodeId::aspect(0));
        let belongs = g.edges_of(RelationType::BelongsTo)[0].triple;
        assert_eq!((belongs.source, belongs.destination), (NodeId::aspect(0), NodeId::item(0)));
    }

    #[test]
    fn figure_one_scenario() {
        let (ratings, opinions) = figure_one();
        let (g, _) = KnowledgeGraph::build(&ratings, &opinions, GraphVariant::Gera);
        assert_eq!(g.node_count(NodeKind::User), 3);
        assert_eq!(g.node_count(NodeKind::Item), 1);
        assert_eq!(g.node_count(NodeKind::Aspect), 2);
        assert_eq!(g.edge_count(), 7);
        let opinion_edges = g.edges().iter().filter(|e| e.triple.relation.is_opinion()).count();
        assert_eq!(opinion_edges, 3);
        assert_eq!(g.edges_of(RelationType::BelongsTo).len(), 2);
        assert_eq!(g.edges_of(RelationType::LowRating).len(), 1);
        assert_eq!(g.edges_of(RelationType::HighRating).len(), 1);
        assert_eq!(g.edges_of(RelationType::DoesNotCare).len(), 1);
    }

    #[test]
    fn belongs_to_deduplicated() {
        let opinions = vec![
            AspectOpinionRecord::new("u1", "i1", "a1", 1.0),
            AspectOpinionRecord::new("u2", "i1", "A1 ", -0.5),
        ];
        let (g, _) = KnowledgeGraph::build(&[], &opinions, GraphVariant::Gera);
        let pairs: HashSet<_> = g
            .edges_of(RelationType::BelongsTo)
            .iter()
            .map(|e| (e.triple.source, e.triple.destination))
            .collect();
        assert_eq!(pairs.len(), 1);
        assert_eq!(g.edges_of(RelationType::BelongsTo).len(), 1);
        assert_eq!(g.node_count(NodeKind::Aspect), 1);
    }

    #[test]
    fn duplicate_ratings_keep_last() {
        let ratings = vec![
            RatingRecord::new("u", "i", 5.0),
            RatingRecord::new("u", "j", 4.0),
            RatingRecord::new("u", "i", 2.0),
        ];
        let (g, _) = KnowledgeGraph::build(&ratings, &[], GraphVariant::Ger);
        assert_eq!(g.edge_count(), 2);
        let low = g.edges_of(RelationType::LowRating);
        assert_eq!(low.len(), 1);
        assert!(matches!(low[0].provenance, Provenance::Rating { record: 2, .. }));
    }

    #[test]
    fn identical_opinions_deduplicate_but_repeats_stay() {
        let opinions = vec![
            AspectOpinionRecord::new("u", "i", "a", 1.0),
            AspectOpinionRecord::new("u", "i", "a", 1.0),
            AspectOpinionRecord::new("u", "i", "a", 0.5),
        ];
        let (g, _) = KnowledgeGraph::build(&[], &opinions, GraphVariant::Gea);
        assert_eq!(g.edges_of(RelationType::Like).len(), 2);
    }

    #[test]
    fn invalid_records_rejected() {
        let ratings = vec![RatingRecord::new("u", "i", 9.0), RatingRecord::new("u", "j", 4.0)];
        let opinions = vec![
            AspectOpinionRecord::new("u", "i", "a", f64::NAN),
            AspectOpinionRecord::new("u", "i", "  ", 1.0),
        ];
        let (g, rejected) = KnowledgeGraph::build(&ratings, &opinions, GraphVariant::Gera);
        assert_eq!(rejected.len(), 3);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.node_count(NodeKind::Item), 1);
    }

    #[test]
    fn registries_only_hold_admitted_nodes() {
        let (ratings, opinions) = figure_one();
        let (g, _) = KnowledgeGraph::build(&ratings, &opinions, GraphVariant::Ger);
        assert_eq!(g.node_count(NodeKind::User), 2);
        assert_eq!(g.node_count(NodeKind::Aspect), 0);
        assert!(g.node(NodeKind::User, "user3").is_none());
    }

    #[test]
    fn adjacency_queries() {
        let (ratings, opinions) = figure_one();
        let (g, _) = KnowledgeGraph::build(&ratings, &opinions, GraphVariant::Gera);
        let item = g.node(NodeKind::Item, "item1").unwrap().ordinal;
        assert_eq!(g.raters_of(item), vec![0, 1, 2]);
        assert_eq!(g.item_aspects(item), &[0, 1]);
        assert_eq!(g.rated_items(0).collect::<Vec<_>>(), vec![item]);
        assert_eq!(g.user_opinion_edges(2).count(), 1);
    }
}
