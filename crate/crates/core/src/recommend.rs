//! Top-N recommendation and user neighborhoods by cosine proximity.
//!
//! Complex embeddings are compared as flattened `[re.., im..]` real vectors.

use serde::Serialize;

use crate::embedding::{ComplexVector, EmbeddingModel};
use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, NodeId, NodeKind};
use crate::scalar::Scalar;

pub fn flatten<T: Scalar>(v: &ComplexVector<T>) -> Vec<T> {
    v.flatten()
}

/// `u·v / (‖u‖‖v‖)`, or 0 when either norm is 0. Accumulates in f64.
pub fn cosine<T: Scalar>(u: &[T], v: &[T]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b) = (a.as_f64(), b.as_f64());
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankedEntry {
    pub node: NodeId,
    pub score: f64,
}

/// Scores in non-increasing order, ties by ascending ordinal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankedList {
    pub subject: NodeId,
    pub cutoff: usize,
    pub entries: Vec<RankedEntry>,
}

impl RankedList {
    /// Sorts `scored` by the ranking contract and keeps the first `cutoff`.
    pub fn from_scores(subject: NodeId, cutoff: usize, mut scored: Vec<(NodeId, f64)>) -> Self {
        sort_ranked(&mut scored);
        scored.truncate(cutoff);
        Self {
            subject,
            cutoff,
            entries: scored.into_iter().map(|(node, score)| RankedEntry { node, score }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.entries.iter().map(|e| e.node)
    }
}

pub fn sort_ranked(scored: &mut [(NodeId, f64)]) {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.ordinal.cmp(&b.0.ordinal)));
}

/// Top `n` items for `user`. With `exclude_seen`, items the user rated in
/// `graph` are dropped. Aspects are never candidates.
pub fn recommend_top_n<T: Scalar>(
    model: &EmbeddingModel<T>,
    graph: &KnowledgeGraph,
    user: NodeId,
    n: usize,
    exclude_seen: bool,
) -> Result<RankedList> {
    expect_kind(user, NodeKind::User)?;
    let u = model.entity_row(user)?;
    let mut seen = vec![false; model.entity_count(NodeKind::Item)];
    if exclude_seen && (user.ordinal as usize) < graph.node_count(NodeKind::User) {
        for item in graph.rated_items(user.ordinal) {
            if let Some(s) = seen.get_mut(item as usize) {
                *s = true;
            }
        }
    }
    let mut scored = Vec::with_capacity(seen.len());
    for (ordinal, &skip) in seen.iter().enumerate() {
        if skip {
            continue;
        }
        let item = NodeId::item(ordinal as u32);
        scored.push((item, cosine(u, model.entity_row(item)?)?));
    }
    Ok(RankedList::from_scores(user, n, scored))
}

/// The `k` users closest to `user`, excluding `user`.
pub fn nearest_users<T: Scalar>(model: &EmbeddingModel<T>, user: NodeId, k: usize) -> Result<RankedList> {
    expect_kind(user, NodeKind::User)?;
    let u = model.entity_row(user)?;
    let mut scored = Vec::new();
    for ordinal in 0..model.entity_count(NodeKind::User) as u32 {
        if ordinal == user.ordinal {
            continue;
        }
        let other = NodeId::user(ordinal);
        scored.push((other, cosine(u, model.entity_row(other)?)?));
    }
    Ok(RankedList::from_scores(user, k, scored))
}

fn expect_kind(node: NodeId, kind: NodeKind) -> Result<()> {
    if node.kind != kind {
        return Err(Error::Invalid(format!("expected a {kind} node, got a {}", node.kind)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::TrainingConfig;
    use crate::graph::{GraphVariant, RatingRecord};

    fn cv(v: &[f32]) -> ComplexVector<f32> {
        ComplexVector::from_flat(v.to_vec())
    }

    #[test]
    fn flatten_and_cosine_basics() {
        let v = ComplexVector::from_pairs(&[(1.0f64, 2.0)]);
        assert_eq!(flatten(&v), vec![1.0, 2.0]);
        assert_eq!(cosine(&[0.0f64, 0.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[3.0f64, -1.0], &[3.0, -1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0f64, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!(cosine(&[1.0f64], &[1.0, 2.0]).is_err());
    }

    fn model_and_graph() -> (EmbeddingModel<f32>, KnowledgeGraph) {
        let ratings = vec![
            RatingRecord::new("u0", "i0", 5.0),
            RatingRecord::new("u0", "i1", 2.0),
            RatingRecord::new("u1", "i2", 4.0),
        ];
        let g = KnowledgeGraph::build(&ratings, &[], GraphVariant::Ger).0;
        let users = vec![cv(&[1.0, 0.0, 0.0, 0.0]), cv(&[1.0, 0.0, 0.0, 0.0])];
        let items = vec![cv(&[0.0, 1.0, 0.0, 0.0]), cv(&[1.0, 0.0, 0.0, 0.0]), cv(&[1.0, 1.0, 0.0, 0.0])];
        let m = EmbeddingModel::from_tables(2, [users, items, vec![]], vec![], TrainingConfig::default()).unwrap();
        (m, g)
    }

    #[test]
    fn identical_item_first() {
        let (m, g) = model_and_graph();
        let list = recommend_top_n(&m, &g, NodeId::user(1), 3, false).unwrap();
        assert_eq!(list.entries[0].node, NodeId::item(1));
        assert!((list.entries[0].score - 1.0).abs() < 1e-12);
        assert_eq!(list.len(), 3);
    }

    #[test]
    fn exclude_seen() {
        let (m, g) = model_and_graph();
        let list = recommend_top_n(&m, &g, NodeId::user(0), 10, true).unwrap();
        assert_eq!(list.nodes().collect::<Vec<_>>(), vec![NodeId::item(2)]);
    }

    #[test]
    fn twin_user_is_nearest() {
        let (m, _) = model_and_graph();
        let list = nearest_users(&m, NodeId::user(0), 5).unwrap();
        assert_eq!(list.len(), 1);
        assert_eq!(list.entries[0].node, NodeId::user(1));
        assert!(nearest_users(&m, NodeId::user(7), 1).is_err());
    }

    #[test]
    fn ties_by_ordinal() {
        let mut s = vec![(NodeId::item(3), 0.5), (NodeId::item(1), 0.5), (NodeId::item(2), 0.9)];
        sort_ranked(&mut s);
        assert_eq!(s.iter().map(|p| p.0.ordinal).collect::<Vec<_>>(), vec![2, 1, 3]);
    }
}
