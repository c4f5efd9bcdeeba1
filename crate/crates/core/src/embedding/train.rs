//! Stochastic-gradient training over a bucket schedule.
//!
//! Embedding rows live in one shard per partition. A bucket owns the shards
//! of its two partitions for the duration of its pass, so buckets of one wave
//! run in parallel without sharing rows. Relation vectors are global: each
//! edge copies its relation row out under the lock, computes, then applies
//! its relation gradient under the lock again.
//!
//! Negatives are drawn from the nodes of the bucket's own partitions. With a
//! single partition that is the whole graph and a run is bit-reproducible for
//! a fixed seed.

use std::sync::Mutex;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::complex::{ComplexDiagonal, TripleScorer};
use super::config::{BatchOrder, TrainingConfig};
use super::loss::{hinge_gradients, TripleSlots};
use super::model::EmbeddingModel;
use super::partition::{partition_schedule, Bucket, BucketSchedule};
use super::sampling::{sample_negatives_from, KindPools};
use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, NodeId, NodeKind, Triple};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub wall_millis: u64,
}

#[derive(Clone, Debug)]
pub struct TrainingOutcome<T> {
    pub model: EmbeddingModel<T>,
    pub history: Vec<EpochStats>,
}

pub fn train<T: Scalar>(graph: &KnowledgeGraph, config: &TrainingConfig) -> Result<TrainingOutcome<T>> {
    train_with(graph, config, &ComplexDiagonal, |_| {})
}

/// Trains from the seeded initialization, reporting each finished epoch.
pub fn train_with<T, S, F>(
    graph: &KnowledgeGraph,
    config: &TrainingConfig,
    scorer: &S,
    mut on_epoch: F,
) -> Result<TrainingOutcome<T>>
where
    T: Scalar,
    S: TripleScorer<T>,
    F: FnMut(&EpochStats),
{
    config.validate()?;
    if graph.edge_count() == 0 {
        return Err(Error::Config("graph has no edges".into()));
    }
    let initial = EmbeddingModel::<T>::initialize(graph, config);
    let schedule = partition_schedule(graph, config.partitions, config.seed);
    let layout = Layout::new(&initial, &schedule);
    let mut shards = layout.split(&initial, &schedule);
    let relations = Mutex::new(initial.relations.clone());
    let ctx = Context {
        graph,
        config,
        scorer,
        layout: &layout,
        width: 2 * config.dimension,
        stream_stride: schedule.buckets.len() as u64,
        margin: T::from_f64_lossy(config.margin),
        learning_rate: T::from_f64_lossy(config.learning_rate),
        relations: &relations,
    };

    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let started = Instant::now();
        let mut loss_sum = 0.0;
        for wave in &schedule.waves {
            let jobs: Vec<Job<T>> = wave
                .iter()
                .map(|&b| Job::take(&mut shards, b, &schedule.buckets[b]))
                .collect();
            let run = |mut job: Job<T>| {
                let bucket = &schedule.buckets[job.bucket_index];
                let r = ctx.run_bucket(&mut job, bucket, epoch);
                (job, r)
            };
            let results: Vec<(Job<T>, Result<f64>)> = if jobs.len() > 1 {
                jobs.into_par_iter().map(run).collect()
            } else {
                jobs.into_iter().map(run).collect()
            };
            let mut failure = None;
            for (job, r) in results {
                job.restore(&mut shards);
                match r {
                    Ok(loss) => loss_sum += loss,
                    Err(e) => failure = failure.or(Some(e)),
                }
            }
            if let Some(e) = failure {
                return Err(e);
            }
        }
        let stats = EpochStats {
            epoch: epoch + 1,
            mean_loss: loss_sum / graph.edge_count() as f64,
            wall_millis: started.elapsed().as_millis() as u64,
        };
        on_epoch(&stats);
        history.push(stats);
    }

    let mut model = initial;
    layout.merge(&shards, &mut model);
    model.relations = relations.into_inner().expect("relation lock poisoned");
    Ok(TrainingOutcome { model, history })
}

struct Shard<T> {
    partition: usize,
    rows: Vec<T>,
}

struct Job<T> {
    bucket_index: usize,
    source: Shard<T>,
    /// `None` when both endpoints live in the same partition.
    destination: Option<Shard<T>>,
}

impl<T> Job<T> {
    fn take(shards: &mut [Option<Shard<T>>], bucket_index: usize, bucket: &Bucket) -> Self {
        let (sp, dp) = (bucket.source_partition, bucket.destination_partition);
        let source = shards[sp].take().expect("wave partitions are disjoint");
        let destination = (dp != sp).then(|| shards[dp].take().expect("wave partitions are disjoint"));
        Job {
            bucket_index,
            source,
            destination,
        }
    }

    fn restore(self, shards: &mut [Option<Shard<T>>]) {
        let p = self.source.partition;
        shards[p] = Some(self.source);
        if let Some(d) = self.destination {
            let p = d.partition;
            shards[p] = Some(d);
        }
    }
}

/// Node → (partition, local row) map and per-partition sampling pools.
struct Layout {
    partition: [Vec<u32>; 3],
    local_row: [Vec<u32>; 3],
    pools: Vec<KindPools>,
}

impl Layout {
    fn new<T: Scalar>(model: &EmbeddingModel<T>, schedule: &BucketSchedule) -> Self {
        let mut partition = NodeKind::ALL.map(|k| vec![0u32; model.entity_count(k)]);
        let mut local_row = partition.clone();
        let mut pools = Vec::with_capacity(schedule.partitions);
        for p in 0..schedule.partitions {
            let mut pool = KindPools::default();
            for (local, node) in schedule.members(p).enumerate() {
                partition[node.kind.index()][node.ordinal as usize] = p as u32;
                local_row[node.kind.index()][node.ordinal as usize] = local as u32;
                pool.push(node);
            }
            pools.push(pool);
        }
        Self {
            partition,
            local_row,
            pools,
        }
    }

    fn local(&self, node: NodeId) -> u32 {
        self.local_row[node.kind.index()][node.ordinal as usize]
    }

    fn split<T: Scalar>(&self, model: &EmbeddingModel<T>, schedule: &BucketSchedule) -> Vec<Option<Shard<T>>> {
        (0..schedule.partitions)
            .map(|p| {
                let mut rows = Vec::new();
                for node in schedule.members(p) {
                    rows.extend_from_slice(model.entity_row(node).expect("node in model"));
                }
                Some(Shard { partition: p, rows })
            })
            .collect()
    }

    fn merge<T: Scalar>(&self, shards: &[Option<Shard<T>>], model: &mut EmbeddingModel<T>) {
        let w = 2 * model.dimension;
        for kind in NodeKind::ALL {
            let table = &mut model.entities[kind.index()];
            for ordinal in 0..self.partition[kind.index()].len() {
                let p = self.partition[kind.index()][ordinal] as usize;
                let local = self.local_row[kind.index()][ordinal] as usize;
                let shard = shards[p].as_ref().expect("all shards restored");
                table[ordinal * w..(ordinal + 1) * w].copy_from_slice(&shard.rows[local * w..(local + 1) * w]);
            }
        }
    }
}

struct Context<'a, T, S> {
    graph: &'a KnowledgeGraph,
    config: &'a TrainingConfig,
    scorer: &'a S,
    layout: &'a Layout,
    width: usize,
    stream_stride: u64,
    margin: T,
    learning_rate: T,
    relations: &'a Mutex<[Option<Vec<T>>; 6]>,
}

/// Rows touched by one positive and its negatives, copied out of the shards.
/// A key is (row lives in the destination shard, local row).
struct Workspace<T> {
    keys: Vec<(bool, u32)>,
    rows: Vec<T>,
    grads: Vec<T>,
    relation: Vec<T>,
    grad_relation: Vec<T>,
    scratch: Vec<T>,
    negatives: Vec<Triple>,
    negative_slots: Vec<TripleSlots>,
}

impl<T: Scalar> Workspace<T> {
    fn new(width: usize) -> Self {
        Self {
            keys: Vec::new(),
            rows: Vec::new(),
            grads: Vec::new(),
            relation: vec![T::zero(); width],
            grad_relation: vec![T::zero(); width],
            scratch: Vec::new(),
            negatives: Vec::new(),
            negative_slots: Vec::new(),
        }
    }

    fn slot(&mut self, key: (bool, u32), shard: &[T], width: usize) -> usize {
        if let Some(i) = self.keys.iter().position(|&k| k == key) {
            return i;
        }
        let start = key.1 as usize * width;
        self.rows.extend_from_slice(&shard[start..start + width]);
        self.keys.push(key);
        self.keys.len() - 1
    }
}

impl<T: Scalar, S: TripleScorer<T>> Context<'_, T, S> {
    fn run_bucket(&self, job: &mut Job<T>, bucket: &Bucket, epoch: usize) -> Result<f64> {
        let width = self.width;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(1 + epoch as u64 * self.stream_stride + job.bucket_index as u64);

        let mut order = bucket.edges.clone();
        if self.config.batch_order == BatchOrder::Shuffled {
            order.shuffle(&mut rng);
        }
        let source_pool = &self.layout.pools[bucket.source_partition];
        let destination_pool = &self.layout.pools[bucket.destination_partition];
        let split = job.destination.is_some();

        let mut ws = Workspace::new(width);
        let mut loss_sum = 0.0;
        for edge_index in order {
            let positive = self.graph.edges()[edge_index].triple;
            sample_negatives_from(
                &positive,
                self.config.negatives_per_positive,
                source_pool,
                destination_pool,
                &mut rng,
                &mut ws.negatives,
            )?;

            ws.keys.clear();
            ws.rows.clear();
            ws.negative_slots.clear();
            let src_rows = &job.source.rows;
            let dst_rows = job.destination.as_ref().map_or(src_rows, |d| &d.rows);
            let pos_slots = TripleSlots::new(
                ws.slot((false, self.layout.local(positive.source)), src_rows, width),
                ws.slot((split, self.layout.local(positive.destination)), dst_rows, width),
            );
            for i in 0..ws.negatives.len() {
                let t = ws.negatives[i];
                let slots = TripleSlots::new(
                    ws.slot((false, self.layout.local(t.source)), src_rows, width),
                    ws.slot((split, self.layout.local(t.destination)), dst_rows, width),
                );
                ws.negative_slots.push(slots);
            }

            let relation = positive.relation.index();
            {
                let table = self.relations.lock().expect("relation lock poisoned");
                let row = table[relation].as_ref().expect("relation present in graph");
                ws.relation.copy_from_slice(row);
            }
            ws.grads.clear();
            ws.grads.resize(ws.rows.len(), T::zero());
            ws.grad_relation.fill(T::zero());
            let outcome = hinge_gradients(
                self.scorer,
                &ws.rows,
                width,
                &ws.relation,
                pos_slots,
                &ws.negative_slots,
                self.margin,
                &mut ws.grads,
                &mut ws.grad_relation,
                &mut ws.scratch,
            );
            let loss = outcome.loss.as_f64();
            if !loss.is_finite() {
                return Err(Error::NonFinite {
                    epoch: epoch + 1,
                    edge: edge_index,
                    detail: format!("loss {loss}"),
                });
            }
            loss_sum += loss;
            if outcome.active == 0 {
                continue;
            }

            let lr = self.learning_rate;
            for (slot, &(in_dst, local)) in ws.keys.iter().enumerate() {
                let shard = if in_dst {
                    &mut job.destination.as_mut().expect("split bucket").rows
                } else {
                    &mut job.source.rows
                };
                let row = &mut shard[local as usize * width..(local as usize + 1) * width];
                let grad = &ws.grads[slot * width..(slot + 1) * width];
                for (v, &g) in row.iter_mut().zip(grad) {
                    *v -= lr * g;
                }
                if !row.iter().all(|v| v.is_finite()) {
                    return Err(Error::NonFinite {
                        epoch: epoch + 1,
                        edge: edge_index,
                        detail: "entity vector".into(),
                    });
                }
            }
            let mut table = self.relations.lock().expect("relation lock poisoned");
            let row = table[relation].as_mut().expect("relation present in graph");
            for (v, &g) in row.iter_mut().zip(&ws.grad_relation) {
                *v -= lr * g;
            }
            if !row.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite {
                    epoch: epoch + 1,
                    edge: edge_index,
                    detail: format!("{} vector", positive.relation),
                });
            }
        }
        Ok(loss_sum)
    }
}
