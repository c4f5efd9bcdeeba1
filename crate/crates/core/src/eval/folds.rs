use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::RatingRecord;

/// Fold index of every rating record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FoldPlan {
    pub fold_count: usize,
    pub seed: u64,
    pub assignment: Vec<usize>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter(move |(_, &f)| f == fold)
            .map(|(i, _)| i)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.fold_count];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Per-user stratified split.
///
/// Each user's records are shuffled with the seed and dealt round-robin. The
/// dealing position carries over from one user to the next, so fold sizes
/// differ by at most one.
pub fn kfold_split(ratings: &[RatingRecord], fold_count: usize, seed: u64) -> Result<FoldPlan> {
    if fold_count < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {fold_count}")));
    }
    let mut order: Vec<&str> = Vec::new();
    let mut by_user: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, r) in ratings.iter().enumerate() {
        by_user
            .entry(&r.user)
            .or_insert_with(|| {
                order.push(&r.user);
                Vec::new()
            })
            .push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; ratings.len()];
    let mut next = 0;
    for user in order {
        let records = by_user.get_mut(user).expect("grouped");
        records.shuffle(&mut rng);
        for &i in records.iter() {
            assignment[i] = next;
            next = (next + 1) % fold_count;
        }
    }
    Ok(FoldPlan {
        fold_count,
        seed,
        assignment,
    })
}

/// Drops all but the last rating of each (user, item) pair, keeping order.
pub fn dedupe_ratings(ratings: &[RatingRecord]) -> Vec<RatingRecord> {
    let mut last: HashMap<(&str, &str), usize> = HashMap::new();
    for (i, r) in ratings.iter().enumerate() {
        last.insert((&r.user, &r.item), i);
    }
    ratings
        .iter()
        .enumerate()
        .filter(|(i, r)| last[&(r.user.as_str(), r.item.as_str())] == *i)
        .map(|(_, r)| r.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records(per_user: &[usize]) -> Vec<RatingRecord> {
        per_user
            .iter()
            .enumerate()
            .flat_map(|(u, &n)| (0..n).map(move |i| RatingRecord::new(format!("u{u}"), format!("i{i}"), 4.0)))
            .collect()
    }

    fn folds_of(plan: &FoldPlan, ratings: &[RatingRecord], user: &str) -> Vec<usize> {
        let mut f: Vec<_> = ratings
            .iter()
            .zip(&plan.assignment)
            .filter(|(r, _)| r.user == user)
            .map(|(_, &f)| f)
            .collect();
        f.sort_unstable();
        f
    }

    #[test]
    fn spreads_each_user() {
        let r = records(&[5, 3]);
        let plan = kfold_split(&r, 5, 1).unwrap();
        assert_eq!(folds_of(&plan, &r, "u0"), vec![0, 1, 2, 3, 4]);
        let mut u1 = folds_of(&plan, &r, "u1");
        u1.dedup();
        assert_eq!(u1.len(), 3);
    }

    #[test]
    fn balanced_sizes() {
        let per_user: Vec<usize> = (0..37).map(|u| 1 + (u * 13) % 50).collect();
        let r = records(&per_user);
        let plan = kfold_split(&r, 5, 9).unwrap();
        let sizes = plan.fold_sizes();
        assert_eq!(sizes.iter().sum::<usize>(), r.len());
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        assert!(kfold_split(&r, 1, 0).is_err());
    }

    #[test]
    fn dedupe_keeps_last() {
        let r = vec![
            RatingRecord::new("u", "i", 1.0),
            RatingRecord::new("u", "j", 2.0),
            RatingRecord::new("u", "i", 5.0),
        ];
        let d = dedupe_ratings(&r);
        assert_eq!(d, vec![r[1].clone(), r[2].clone()]);
    }
}
