//! Loaded artifacts and the queries answered over them.
//!
//! Every query is a pure function of the session and its arguments; the
//! HTTP handlers and the CLI both go through these.

use std::collections::BTreeMap;
use std::path::Path;

use kgrec::explain::{highlight_aspects_with, project_users_2d, HighlightedReview, SynonymLexicon};
use kgrec::graph::{AspectOpinionRecord, KnowledgeGraph, NodeId, NodeKind, Provenance, RelationType, ReviewIndex};
use kgrec::recommend::recommend_top_n;
use kgrec::{Error, Model};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApiError {
    pub status: u16,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: 400,
            code: "bad_request",
            message: message.into(),
        }
    }

    fn not_found(kind: NodeKind, key: &str) -> Self {
        Self {
            status: 404,
            code: match kind {
                NodeKind::User => "unknown_user",
                NodeKind::Item => "unknown_item",
                NodeKind::Aspect => "unknown_aspect",
            },
            message: format!("unknown {kind} `{key}`"),
        }
    }

    fn internal(e: Error) -> Self {
        Self {
            status: 500,
            code: "internal",
            message: e.to_string(),
        }
    }
}

pub type ApiResult<T> = std::result::Result<T, ApiError>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecommendationEntry {
    pub item: String,
    pub score: f64,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RaterPoint {
    pub user: String,
    pub x: f64,
    pub y: f64,
    pub is_subject: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AspectHistograms {
    pub liked: BTreeMap<String, usize>,
    pub disliked: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UserReview {
    pub user: String,
    #[serde(flatten)]
    pub review: HighlightedReview,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReviewPage {
    pub item: String,
    pub page: usize,
    pub page_size: usize,
    pub total_reviews: usize,
    pub total_pages: usize,
    pub reviews: Vec<UserReview>,
}

/// Counts per rating value 1 to 5; half points fall to the lower bucket.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RatingDistribution {
    pub item: String,
    pub counts: BTreeMap<u8, usize>,
}

/// Model, graph and reviews, loaded once and never mutated.
pub struct ApiSession {
    pub model: Model,
    pub graph: KnowledgeGraph,
    pub reviews: ReviewIndex,
    pub lexicon: Option<SynonymLexicon>,
    pub projection_seed: u64,
}

impl ApiSession {
    /// Fails when the model was not trained on `graph`.
    pub fn new(model: Model, graph: KnowledgeGraph, reviews: ReviewIndex) -> kgrec::Result<Self> {
        model.check_compatible(&graph)?;
        Ok(Self {
            model,
            graph,
            reviews,
            lexicon: None,
            projection_seed: 0,
        })
    }

    pub fn load(model: &Path, graph: &Path, reviews: Option<&Path>) -> kgrec::Result<Self> {
        let model = Model::load(model)?;
        let graph = KnowledgeGraph::load(graph)?;
        let reviews = match reviews {
            Some(path) => {
                let file = std::fs::File::open(path).map_err(|source| Error::Io {
                    path: path.to_owned(),
                    source,
                })?;
                let mut warnings = Vec::new();
                let index = kgrec::graph::parse_reviews(file, &path.display().to_string(), &mut warnings)?;
                for w in warnings {
                    log::warn!("{}:{}: {}", w.file, w.line, w.message);
                }
                index
            }
            None => ReviewIndex::default(),
        };
        Self::new(model, graph, reviews)
    }

    pub fn user(&self, key: &str) -> ApiResult<NodeId> {
        self.graph
            .node(NodeKind::User, key)
            .ok_or_else(|| ApiError::not_found(NodeKind::User, key))
    }

    pub fn item(&self, key: &str) -> ApiResult<NodeId> {
        self.graph
            .node(NodeKind::Item, key)
            .ok_or_else(|| ApiError::not_found(NodeKind::Item, key))
    }

    fn users(&self, keys: &[String]) -> ApiResult<Vec<NodeId>> {
        keys.iter().map(|k| self.user(k)).collect()
    }

    /// Users selected by `keys`, or every user who rated or reviewed `item`.
    fn selection(&self, item: NodeId, keys: Option<&[String]>) -> ApiResult<Vec<NodeId>> {
        match keys {
            Some(keys) => {
                let mut users = self.users(keys)?;
                users.sort();
                users.dedup();
                Ok(users)
            }
            None => Ok(self.graph.raters_of(item.ordinal).into_iter().map(NodeId::user).collect()),
        }
    }

    pub fn recommendations(&self, user: &str, n: usize, include_seen: bool) -> ApiResult<Vec<RecommendationEntry>> {
        let user = self.user(user)?;
        let list = recommend_top_n(&self.model, &self.graph, user, n, !include_seen).map_err(ApiError::internal)?;
        Ok(list
            .entries
            .into_iter()
            .enumerate()
            .map(|(i, e)| RecommendationEntry {
                item: self.graph.key(e.node).to_owned(),
                score: e.score,
                rank: i + 1,
            })
            .collect())
    }

    /// Raters of `item` on the plane. A lone rater sits at the origin.
    pub fn raters(&self, item: &str, subject: Option<&str>) -> ApiResult<Vec<RaterPoint>> {
        let item = self.item(item)?;
        let users: Vec<NodeId> = self.graph.raters_of(item.ordinal).into_iter().map(NodeId::user).collect();
        let coords: Vec<(f64, f64)> = if users.len() < 2 {
            vec![(0.0, 0.0); users.len()]
        } else {
            project_users_2d(&self.model, &users, self.projection_seed)
                .map_err(ApiError::internal)?
                .coords
                .into_iter()
                .map(|p| (p.x, p.y))
                .collect()
        };
        Ok(users
            .iter()
            .zip(coords)
            .map(|(&u, (x, y))| {
                let key = self.graph.key(u);
                RaterPoint {
                    user: key.to_owned(),
                    x,
                    y,
                    is_subject: subject == Some(key),
                }
            })
            .collect())
    }

    /// Like and dislike edges from `users` to aspects that belong to `item`.
    pub fn aspect_distribution(&self, item: &str, users: &[String]) -> ApiResult<AspectHistograms> {
        let item = self.item(item)?;
        if users.is_empty() {
            return Err(ApiError::bad_request("`users` must name at least one user"));
        }
        let aspects = self.graph.item_aspects(item.ordinal);
        let mut out = AspectHistograms::default();
        for user in self.selection(item, Some(users))? {
            for edge in self.graph.user_opinion_edges(user.ordinal) {
                if aspects.contains(&edge.triple.destination.ordinal) {
                    self.count(&mut out, edge.triple.relation, edge.triple.destination);
                }
            }
        }
        Ok(out)
    }

    pub fn aspect_profile(&self, user: &str) -> ApiResult<AspectHistograms> {
        let user = self.user(user)?;
        let mut out = AspectHistograms::default();
        for edge in self.graph.user_opinion_edges(user.ordinal) {
            self.count(&mut out, edge.triple.relation, edge.triple.destination);
        }
        Ok(out)
    }

    fn count(&self, out: &mut AspectHistograms, relation: RelationType, aspect: NodeId) {
        let histogram = match relation {
            RelationType::Like => &mut out.liked,
            RelationType::Dislike => &mut out.disliked,
            _ => return,
        };
        *histogram.entry(self.graph.key(aspect).to_owned()).or_default() += 1;
    }

    /// The opinions `user` wrote about `item`, as ingested.
    pub fn opinions_on(&self, user: NodeId, item: NodeId) -> Vec<AspectOpinionRecord> {
        self.graph
            .user_opinion_edges(user.ordinal)
            .filter_map(|e| match e.provenance {
                Provenance::Opinion { item: i, polarity, .. } if i == item.ordinal => Some(AspectOpinionRecord::new(
                    self.graph.key(user),
                    self.graph.key(item),
                    self.graph.key(e.triple.destination),
                    polarity,
                )),
                _ => None,
            })
            .collect()
    }

    /// Page `page` (from 0) of the selected users' reviews of `item`, by
    /// user ordinal. Page 0 of an empty result is empty; any later page out
    /// of range is a 416.
    pub fn reviews(&self, item: &str, users: Option<&[String]>, page: usize, page_size: usize) -> ApiResult<ReviewPage> {
        let item = self.item(item)?;
        if page_size == 0 {
            return Err(ApiError::bad_request("`pageSize` must be at least 1"));
        }
        let selection = self.selection(item, users)?;
        let item_key = self.graph.key(item);
        let found: Vec<(NodeId, &str)> = selection
            .into_iter()
            .filter_map(|u| self.reviews.get(self.graph.key(u), item_key).map(|t| (u, t)))
            .collect();
        let total_pages = found.len().div_ceil(page_size);
        if page >= total_pages.max(1) {
            return Err(ApiError {
                status: 416,
                code: "page_out_of_range",
                message: format!("page {page} requested, {total_pages} available"),
            });
        }
        let reviews = found
            .iter()
            .skip(page * page_size)
            .take(page_size)
            .map(|&(u, text)| UserReview {
                user: self.graph.key(u).to_owned(),
                review: highlight_aspects_with(text, &self.opinions_on(u, item), self.lexicon.as_ref()),
            })
            .collect();
        Ok(ReviewPage {
            item: item_key.to_owned(),
            page,
            page_size,
            total_reviews: found.len(),
            total_pages,
            reviews,
        })
    }

    pub fn rating_distribution(&self, item: &str, users: Option<&[String]>) -> ApiResult<RatingDistribution> {
        let item = self.item(item)?;
        let selection = self.selection(item, users)?;
        let mut counts: BTreeMap<u8, usize> = (1..=5).map(|r| (r, 0)).collect();
        for edge in self.graph.item_interactions(item.ordinal) {
            if let Provenance::Rating { value, .. } = edge.provenance {
                if selection.binary_search(&edge.triple.source).is_ok() {
                    *counts.entry(value.floor().clamp(1.0, 5.0) as u8).or_default() += 1;
                }
            }
        }
        Ok(RatingDistribution {
            item: self.graph.key(item).to_owned(),
            counts,
        })
    }
}
