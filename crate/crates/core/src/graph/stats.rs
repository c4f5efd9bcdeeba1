use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::records::{AspectOpinionRecord, RatingRecord};

/// Dataset summary in the shape of the usual dataset statistics table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GraphStats {
    pub user_count: usize,
    pub item_count: usize,
    pub rating_count: usize,
    pub aspect_opinion_count: usize,
    /// `rating_count / (user_count * item_count)`, 0 for an empty matrix.
    pub rating_sparsity: f64,
}

impl GraphStats {
    pub fn from_counts(users: usize, items: usize, ratings: usize, opinions: usize) -> Self {
        let cells = users as f64 * items as f64;
        let rating_sparsity = if cells == 0.0 {
            0.0
        } else {
            ratings as f64 / cells
        };
        Self {
            user_count: users,
            item_count: items,
            rating_count: ratings,
            aspect_opinion_count: opinions,
            rating_sparsity,
        }
    }
}

/// Users and items are counted over the rating records; the sparsity is a
/// property of the rating matrix.
pub fn graph_stats(ratings: &[RatingRecord], opinions: &[AspectOpinionRecord]) -> GraphStats {
    let users: HashSet<&str> = ratings.iter().map(|r| r.user.as_str()).collect();
    let items: HashSet<&str> = ratings.iter().map(|r| r.item.as_str()).collect();
    GraphStats::from_counts(users.len(), items.len(), ratings.len(), opinions.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_dataset() {
        let s = graph_stats(&[], &[]);
        assert_eq!(s, GraphStats::from_counts(0, 0, 0, 0));
        assert_eq!(s.rating_sparsity, 0.0);
    }

    #[test]
    fn full_matrix() {
        let s = graph_stats(&[RatingRecord::new("u", "i", 4.0)], &[]);
        assert_eq!(s.rating_sparsity, 1.0);
    }

    #[test]
    fn movies_and_tv_counts() {
        // 1,349,351 / (40,058 * 131,638)
        let s = GraphStats::from_counts(40_058, 131_638, 1_349_351, 2_132_927);
        assert!((s.rating_sparsity - 2.5589e-4).abs() < 1e-8, "{}", s.rating_sparsity);
    }

    #[test]
    fn counts_distinct() {
        let ratings = vec![
            RatingRecord::new("u1", "i1", 4.0),
            RatingRecord::new("u1", "i2", 2.0),
            RatingRecord::new("u2", "i1", 5.0),
        ];
        let opinions = vec![AspectOpinionRecord::new("u1", "i1", "a", 1.0)];
        let s = graph_stats(&ratings, &opinions);
        assert_eq!((s.user_count, s.item_count, s.rating_count, s.aspect_opinion_count), (2, 2, 3, 1));
        assert!((s.rating_sparsity - 0.75).abs() < 1e-12);
    }
}
