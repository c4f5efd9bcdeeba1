use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, NodeId, NodeKind, Triple};

/// Candidate ordinals per node kind.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KindPools {
    pools: [Vec<u32>; 3],
}

impl KindPools {
    pub fn all_nodes(graph: &KnowledgeGraph) -> Self {
        Self {
            pools: NodeKind::ALL.map(|k| (0..graph.node_count(k) as u32).collect()),
        }
    }

    pub fn push(&mut self, node: NodeId) {
        self.pools[node.kind.index()].push(node.ordinal);
    }

    pub fn get(&self, kind: NodeKind) -> &[u32] {
        &self.pools[kind.index()]
    }

    fn draw<R: Rng + ?Sized>(&self, kind: NodeKind, rng: &mut R) -> Result<NodeId> {
        let pool = self.get(kind);
        if pool.is_empty() {
            return Err(Error::EmptySamplingPool(kind.name()));
        }
        Ok(NodeId::new(kind, pool[rng.random_range(0..pool.len())]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Endpoint {
    Source,
    Destination,
}

/// Replaces one endpoint of `positive` with a uniform node of the legal kind.
pub fn corrupt<R: Rng + ?Sized>(
    positive: &Triple,
    endpoint: Endpoint,
    sources: &KindPools,
    destinations: &KindPools,
    rng: &mut R,
) -> Result<Triple> {
    let (src_kind, dst_kind) = positive.relation.endpoints();
    let mut t = *positive;
    match endpoint {
        Endpoint::Source => t.source = sources.draw(src_kind, rng)?,
        Endpoint::Destination => t.destination = destinations.draw(dst_kind, rng)?,
    }
    Ok(t)
}

/// Draws `n` negatives for `positive` into `out` (cleared first).
///
/// The first `n/2` replace either the source or the destination (fair coin)
/// with a uniform node of the legal kind; the rest draw both endpoints
/// uniformly. Sources come from `sources`, destinations from `destinations`.
/// Collisions with real edges are kept.
pub fn sample_negatives_from<R: Rng + ?Sized>(
    positive: &Triple,
    n: usize,
    sources: &KindPools,
    destinations: &KindPools,
    rng: &mut R,
    out: &mut Vec<Triple>,
) -> Result<()> {
    out.clear();
    let (src_kind, dst_kind) = positive.relation.endpoints();
    let half = n / 2;
    for _ in 0..half {
        let slot = if rng.random_bool(0.5) {
            Endpoint::Destination
        } else {
            Endpoint::Source
        };
        out.push(corrupt(positive, slot, sources, destinations, rng)?);
    }
    for _ in half..n {
        let source = sources.draw(src_kind, rng)?;
        let destination = destinations.draw(dst_kind, rng)?;
        out.push(Triple::new(source, positive.relation, destination));
    }
    Ok(())
}

/// Negatives drawn from the whole graph.
pub fn sample_negatives<R: Rng + ?Sized>(
    positive: &Triple,
    graph: &KnowledgeGraph,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Triple>> {
    if !n.is_multiple_of(2) {
        return Err(Error::Config(format!("negative count {n} is odd")));
    }
    let pools = KindPools::all_nodes(graph);
    let mut out = Vec::with_capacity(n);
    sample_negatives_from(positive, n, &pools, &pools, rng, &mut out)?;
    Ok(out)
}
