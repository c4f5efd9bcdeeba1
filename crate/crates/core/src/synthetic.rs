//! Seeded synthetic datasets with known preference structure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{AspectOpinionRecord, RatingRecord};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SyntheticData {
    pub ratings: Vec<RatingRecord>,
    pub opinions: Vec<AspectOpinionRecord>,
}

/// Two taste clusters of users and items.
///
/// A user rates each item of their own cluster with probability
/// `in_cluster_rate` (rating 4 or 5) and each other item with probability
/// `cross_cluster_rate` (rating 1 to 3). With probability `opinion_rate` a
/// rating is accompanied by an opinion on one of the item cluster's aspects:
/// liked in-cluster, disliked across.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedClusters {
    pub users: usize,
    pub items: usize,
    pub clusters: usize,
    pub aspects_per_cluster: usize,
    pub in_cluster_rate: f64,
    pub cross_cluster_rate: f64,
    pub opinion_rate: f64,
    /// Opinion probability for a cross-cluster rating.
    pub cross_opinion_rate: f64,
}

impl Default for PlantedClusters {
    fn default() -> Self {
        Self {
            users: 200,
            items: 100,
            clusters: 2,
            aspects_per_cluster: 2,
            in_cluster_rate: 1.0,
            cross_cluster_rate: 0.4,
            opinion_rate: 0.5,
            cross_opinion_rate: 0.5,
        }
    }
}

pub fn user_key(u: usize) -> String {
    format!("u{u}")
}

pub fn item_key(i: usize) -> String {
    format!("i{i}")
}

pub fn aspect_key(cluster: usize, a: usize) -> String {
    format!("aspect{cluster}_{a}")
}

impl PlantedClusters {
    pub fn user_cluster(&self, u: usize) -> usize {
        u % self.clusters
    }

    pub fn item_cluster(&self, i: usize) -> usize {
        i % self.clusters
    }

    pub fn generate(&self, seed: u64) -> SyntheticData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = SyntheticData::default();
        for u in 0..self.users {
            for i in 0..self.items {
                let own = self.user_cluster(u) == self.item_cluster(i);
                let rate = if own { self.in_cluster_rate } else { self.cross_cluster_rate };
                if !rng.random_bool(rate) {
                    continue;
                }
                let rating = if own {
                    rng.random_range(4..=5)
                } else {
                    rng.random_range(1..=3)
                };
                data.ratings.push(RatingRecord::new(user_key(u), item_key(i), rating as f64));
                let opinion_rate = if own { self.opinion_rate } else { self.cross_opinion_rate };
                if self.aspects_per_cluster > 0 && rng.random_bool(opinion_rate) {
                    let a = rng.random_range(0..self.aspects_per_cluster);
                    let polarity = if own { 1.0 } else { -1.0 };
                    data.opinions.push(AspectOpinionRecord::new(
                        user_key(u),
                        item_key(i),
                        aspect_key(self.item_cluster(i), a),
                        polarity,
                    ));
                }
            }
        }
        data
    }
}

/// Preference signal split between two user groups.
///
/// Users of the rating group rate their own cluster more often than the
/// other one and write no opinions. Users of the opinion group rate both
/// clusters equally often; which cluster they prefer shows only in their
/// rating values and in their opinions, which like the aspects of their own
/// cluster (and dislike the others' at `cross_opinion_rate`).
#[derive(Clone, Debug, PartialEq)]
pub struct SplitSignal {
    pub users: usize,
    pub items: usize,
    pub clusters: usize,
    pub aspects_per_cluster: usize,
    /// Rating group: probability of rating an own-cluster item.
    pub in_cluster_rate: f64,
    /// Rating group: probability of rating an item of another cluster.
    pub cross_cluster_rate: f64,
    /// Opinion group: probability of rating any item.
    pub flat_rate: f64,
    /// Opinion group: probability of an opinion on each cluster aspect of a
    /// rated own-cluster item.
    pub opinion_rate: f64,
    /// Same, for a rated item of another cluster.
    pub cross_opinion_rate: f64,
}

impl Default for SplitSignal {
    fn default() -> Self {
        Self {
            users: 200,
            items: 100,
            clusters: 2,
            aspects_per_cluster: 10,
            in_cluster_rate: 1.0,
            cross_cluster_rate: 0.4,
            flat_rate: 0.6,
            opinion_rate: 0.5,
            cross_opinion_rate: 0.0,
        }
    }
}

impl SplitSignal {
    /// Even users belong to the rating group, odd users to the opinion group.
    pub fn in_opinion_group(&self, u: usize) -> bool {
        u % 2 == 1
    }

    pub fn user_cluster(&self, u: usize) -> usize {
        (u / 2) % self.clusters
    }

    pub fn item_cluster(&self, i: usize) -> usize {
        i % self.clusters
    }

    pub fn generate(&self, seed: u64) -> SyntheticData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = SyntheticData::default();
        for u in 0..self.users {
            let opinionated = self.in_opinion_group(u);
            for i in 0..self.items {
                let own = self.user_cluster(u) == self.item_cluster(i);
                let rate = match (opinionated, own) {
                    (true, _) => self.flat_rate,
                    (false, true) => self.in_cluster_rate,
                    (false, false) => self.cross_cluster_rate,
                };
                if !rng.random_bool(rate) {
                    continue;
                }
                let rating = if own {
                    rng.random_range(4..=5)
                } else {
                    rng.random_range(1..=3)
                };
                data.ratings.push(RatingRecord::new(user_key(u), item_key(i), rating as f64));
                if !opinionated {
                    continue;
                }
                let opinion_rate = if own { self.opinion_rate } else { self.cross_opinion_rate };
                for a in 0..self.aspects_per_cluster {
                    if rng.random_bool(opinion_rate) {
                        data.opinions.push(AspectOpinionRecord::new(
                            user_key(u),
                            item_key(i),
                            aspect_key(self.item_cluster(i), a),
                            if own { 1.0 } else { -1.0 },
                        ));
                    }
                }
            }
        }
        data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_is_seeded_and_consistent() {
        let p = PlantedClusters::default();
        let a = p.generate(3);
        assert_eq!(a, p.generate(3));
        assert_ne!(a, p.generate(4));
        for r in &a.ratings {
            let u: usize = r.user[1..].parse().unwrap();
            let i: usize = r.item[1..].parse().unwrap();
            assert_eq!(p.user_cluster(u) == p.item_cluster(i), r.rating > 3.0);
        }
        for o in &a.opinions {
            let i: usize = o.item[1..].parse().unwrap();
            assert!(o.aspect.starts_with(&format!("aspect{}_", p.item_cluster(i))));
        }
    }

    #[test]
    fn split_groups() {
        let s = SplitSignal::default();
        let d = s.generate(1);
        for o in &d.opinions {
            let u: usize = o.user[1..].parse().unwrap();
            assert!(s.in_opinion_group(u));
        }
        for r in &d.ratings {
            let u: usize = r.user[1..].parse().unwrap();
            let i: usize = r.item[1..].parse().unwrap();
            assert_eq!(s.user_cluster(u) == s.item_cluster(i), r.rating > 3.0);
        }
    }
}
