//! Node partitioning and bucket scheduling for parallel training.
//!
//! Nodes are hashed into `P` partitions. Each edge falls into the bucket
//! named by its (source partition, destination partition) pair, and buckets
//! are grouped into waves whose members touch pairwise-disjoint partitions,
//! so a wave can train without two buckets writing the same embedding row.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::graph::{KnowledgeGraph, NodeId, NodeKind};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bucket {
    pub source_partition: usize,
    pub destination_partition: usize,
    /// Indices into [`KnowledgeGraph::edges`], in graph order.
    pub edges: Vec<usize>,
}

impl Bucket {
    pub fn partitions(&self) -> [usize; 2] {
        [self.source_partition, self.destination_partition]
    }

    fn conflicts(&self, used: &[bool]) -> bool {
        used[self.source_partition] || used[self.destination_partition]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BucketSchedule {
    pub partitions: usize,
    partition_of: [Vec<u32>; 3],
    pub buckets: Vec<Bucket>,
    /// Bucket indices that may run concurrently, in execution order.
    pub waves: Vec<Vec<usize>>,
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Partition of a node: hash of (kind, ordinal, seed) modulo `partitions`.
pub fn partition_for(node: NodeId, seed: u64, partitions: usize) -> usize {
    let key = ((node.kind.index() as u64) << 32) | node.ordinal as u64;
    (splitmix64(seed ^ splitmix64(key)) % partitions as u64) as usize
}

impl BucketSchedule {
    pub fn partition_of(&self, node: NodeId) -> usize {
        self.partition_of[node.kind.index()][node.ordinal as usize] as usize
    }

    /// Nodes of `partition`, by kind, in ordinal order.
    pub fn members(&self, partition: usize) -> impl Iterator<Item = NodeId> + '_ {
        NodeKind::ALL.into_iter().flat_map(move |kind| {
            self.partition_of[kind.index()]
                .iter()
                .enumerate()
                .filter(move |(_, &p)| p as usize == partition)
                .map(move |(o, _)| NodeId::new(kind, o as u32))
        })
    }

    /// Every edge index in exactly one bucket.
    pub fn partitions_edges(&self, edge_count: usize) -> bool {
        let mut seen = vec![false; edge_count];
        for bucket in &self.buckets {
            for &e in &bucket.edges {
                if e >= edge_count || seen[e] {
                    return false;
                }
                seen[e] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// No partition appears in two buckets of the same wave, and every
    /// bucket is scheduled exactly once.
    pub fn waves_are_disjoint(&self) -> bool {
        let mut scheduled = vec![0usize; self.buckets.len()];
        for wave in &self.waves {
            let mut used = vec![false; self.partitions];
            for &b in wave {
                scheduled[b] += 1;
                let bucket = &self.buckets[b];
                let mut parts = bucket.partitions().to_vec();
                parts.dedup();
                for p in parts {
                    if used[p] {
                        return false;
                    }
                    used[p] = true;
                }
            }
        }
        scheduled.into_iter().all(|c| c == 1)
    }
}

pub fn partition_schedule(graph: &KnowledgeGraph, partitions: usize, seed: u64) -> BucketSchedule {
    let partitions = partitions.max(1);
    let partition_of = NodeKind::ALL.map(|kind| {
        (0..graph.node_count(kind) as u32)
            .map(|o| partition_for(NodeId::new(kind, o), seed, partitions) as u32)
            .collect::<Vec<_>>()
    });
    let lookup = |n: NodeId| partition_of[n.kind.index()][n.ordinal as usize] as usize;

    let mut grouped: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, edge) in graph.edges().iter().enumerate() {
        let key = (lookup(edge.triple.source), lookup(edge.triple.destination));
        grouped.entry(key).or_default().push(i);
    }
    let buckets: Vec<Bucket> = grouped
        .into_iter()
        .map(|((s, d), edges)| Bucket {
            source_partition: s,
            destination_partition: d,
            edges,
        })
        .collect();

    // Greedy: each wave takes every remaining bucket that does not clash.
    let mut remaining: Vec<usize> = (0..buckets.len()).collect();
    let mut waves = Vec::new();
    while !remaining.is_empty() {
        let mut used = vec![false; partitions];
        let mut wave = Vec::new();
        remaining.retain(|&b| {
            let bucket = &buckets[b];
            if bucket.conflicts(&used) {
                return true;
            }
            used[bucket.source_partition] = true;
            used[bucket.destination_partition] = true;
            wave.push(b);
            false
        });
        waves.push(wave);
    }

    BucketSchedule {
        partitions,
        partition_of,
        buckets,
        waves,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphVariant, RatingRecord};

    fn graph(n: usize) -> KnowledgeGraph {
        let ratings: Vec<_> = (0..n)
            .map(|i| RatingRecord::new(format!("u{}", i % 17), format!("i{}", i % 23), 1.0 + (i % 5) as f64))
            .collect();
        KnowledgeGraph::build(&ratings, &[], GraphVariant::Ger).0
    }

    #[test]
    fn single_partition_single_bucket() {
        let g = graph(100);
        let s = partition_schedule(&g, 1, 3);
        assert_eq!(s.buckets.len(), 1);
        assert_eq!(s.buckets[0].edges.len(), g.edge_count());
        assert_eq!(s.waves, vec![vec![0]]);
    }

    #[test]
    fn two_partitions() {
        let g = graph(200);
        let s = partition_schedule(&g, 2, 3);
        assert!(s.buckets.len() <= 4);
        assert!(s.partitions_edges(g.edge_count()));
        assert!(s.waves_are_disjoint());
    }

    #[test]
    fn edges_land_in_their_bucket() {
        let g = graph(300);
        let s = partition_schedule(&g, 4, 9);
        for b in &s.buckets {
            for &e in &b.edges {
                let t = g.edges()[e].triple;
                assert_eq!(s.partition_of(t.source), b.source_partition);
                assert_eq!(s.partition_of(t.destination), b.destination_partition);
            }
        }
        let members: usize = (0..4).map(|p| s.members(p).count()).sum();
        assert_eq!(members, g.node_count(NodeKind::User) + g.node_count(NodeKind::Item));
    }

    #[test]
    fn hash_spreads_nodes() {
        let counts = (0..4000u32).fold([0usize; 4], |mut acc, o| {
            acc[partition_for(NodeId::user(o), 1, 4)] += 1;
            acc
        });
        assert!(counts.iter().all(|&c| (900..1100).contains(&c)), "{counts:?}");
    }
}
