//! Binary model checkpoints.
//!
//! Layout, all integers and reals little-endian:
//!
//! ```text
//! offset  size  field
//! 0       8     magic "KGRECEMB"
//! 8       4     format version (u32)
//! 12      4     scalar width in bytes (u32, 4 or 8)
//! 16      4     complex dimension D (u32)
//! 20      8     user count (u64)
//! 28      8     item count (u64)
//! 36      8     aspect count (u64)
//! 44      4     relation count R (u32)
//! 48      R     relation ids (u8 each, ascending)
//! 48+R    38    config: learning rate f64, epochs u32, margin f64,
//!               negatives u32, seed u64, partitions u32,
//!               batch order u8, relation init u8
//! 86+R    ...   rows: users, items, aspects by ordinal, then relations
//!               in id order; each row is re[D] followed by im[D]
//! end-4   4     CRC-32 of every preceding byte
//! ```

use std::fs;
use std::path::Path;

use super::config::{BatchOrder, RelationInit, TrainingConfig};
use super::model::EmbeddingModel;
use crate::error::{Error, Result};
use crate::graph::{NodeKind, RelationType};
use crate::scalar::Scalar;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"KGRECEMB";
pub const CHECKPOINT_VERSION: u32 = 1;
const CONFIG_BYTES: usize = 38;
const FIXED_HEADER: usize = 48;

/// Exact file size for the given shape.
pub fn checkpoint_len(scalar_bytes: usize, dimension: usize, entities: [usize; 3], relations: usize) -> usize {
    let rows = entities.iter().sum::<usize>() + relations;
    FIXED_HEADER + relations + CONFIG_BYTES + rows * 2 * dimension * scalar_bytes + 4
}

impl<T: Scalar> EmbeddingModel<T> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let relations = self.relation_types();
        let counts = NodeKind::ALL.map(|k| self.entity_count(k));
        let mut out = Vec::with_capacity(checkpoint_len(T::BYTES, self.dimension, counts, relations.len()));
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(T::BYTES as u32).to_le_bytes());
        out.extend_from_slice(&(self.dimension as u32).to_le_bytes());
        for c in counts {
            out.extend_from_slice(&(c as u64).to_le_bytes());
        }
        out.extend_from_slice(&(relations.len() as u32).to_le_bytes());
        out.extend(relations.iter().map(|r| r.index() as u8));

        let c = &self.config;
        out.extend_from_slice(&c.learning_rate.to_le_bytes());
        out.extend_from_slice(&(c.epochs as u32).to_le_bytes());
        out.extend_from_slice(&c.margin.to_le_bytes());
        out.extend_from_slice(&(c.negatives_per_positive as u32).to_le_bytes());
        out.extend_from_slice(&c.seed.to_le_bytes());
        out.extend_from_slice(&(c.partitions as u32).to_le_bytes());
        out.push(match c.batch_order {
            BatchOrder::Shuffled => 0,
            BatchOrder::FileOrder => 1,
        });
        out.push(match c.relation_init {
            RelationInit::Identity => 0,
            RelationInit::Uniform => 1,
        });

        for v in self.entities.iter().flatten() {
            v.write_le(&mut out);
        }
        for r in &relations {
            for &v in self.relations[r.index()].as_ref().expect("listed relation") {
                v.write_le(&mut out);
            }
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    /// Decodes a checkpoint written with the same scalar width as `T`.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let fail = |m: String| Err(Error::Checkpoint(m));
        if bytes.len() < FIXED_HEADER + CONFIG_BYTES + 4 {
            return fail(format!("file too short ({} bytes)", bytes.len()));
        }
        if &bytes[..8] != CHECKPOINT_MAGIC {
            return fail("bad magic bytes".into());
        }
        let mut cur = Cursor { bytes, at: 8 };
        let version = cur.u32();
        if version != CHECKPOINT_VERSION {
            return fail(format!("unsupported format version {version} (expected {CHECKPOINT_VERSION})"));
        }
        let width = cur.u32() as usize;
        if width != T::BYTES {
            return fail(format!("checkpoint holds {width}-byte reals, reader expects {}", T::BYTES));
        }
        let dimension = cur.u32() as usize;
        if dimension == 0 {
            return fail("zero dimension".into());
        }
        let counts = [cur.u64() as usize, cur.u64() as usize, cur.u64() as usize];
        let relation_count = cur.u32() as usize;
        if relation_count > RelationType::ALL.len() {
            return fail(format!("{relation_count} relations declared"));
        }
        let expected = counts
            .iter()
            .try_fold(FIXED_HEADER + relation_count + CONFIG_BYTES + 4, |acc, &c| {
                c.checked_mul(2 * dimension * width)?.checked_add(acc)
            })
            .and_then(|n| n.checked_add(relation_count * 2 * dimension * width));
        if expected != Some(bytes.len()) {
            return fail(format!(
                "file is {} bytes but its header declares {}",
                bytes.len(),
                expected.map_or("an impossible size".to_owned(), |n| n.to_string())
            ));
        }
        let body_end = bytes.len() - 4;
        let stored = u32::from_le_bytes(bytes[body_end..].try_into().expect("4 bytes"));
        if crc32fast::hash(&bytes[..body_end]) != stored {
            return fail("checksum mismatch".into());
        }

        let mut ids = Vec::with_capacity(relation_count);
        for _ in 0..relation_count {
            let id = cur.u8() as usize;
            let r = RelationType::from_index(id).ok_or_else(|| Error::Checkpoint(format!("relation id {id}")))?;
            if ids.last().is_some_and(|&p: &RelationType| p.index() >= id) {
                return fail("relation ids not ascending".into());
            }
            ids.push(r);
        }
        let config = TrainingConfig {
            dimension,
            learning_rate: cur.f64(),
            epochs: cur.u32() as usize,
            margin: cur.f64(),
            negatives_per_positive: cur.u32() as usize,
            seed: cur.u64(),
            partitions: cur.u32() as usize,
            batch_order: match cur.u8() {
                0 => BatchOrder::Shuffled,
                1 => BatchOrder::FileOrder,
                b => return fail(format!("batch order tag {b}")),
            },
            relation_init: match cur.u8() {
                0 => RelationInit::Identity,
                1 => RelationInit::Uniform,
                b => return fail(format!("relation init tag {b}")),
            },
        };
        let mut read_rows = |n: usize| -> Vec<T> { (0..n * 2 * dimension).map(|_| cur.scalar::<T>()).collect() };
        let entities = counts.map(&mut read_rows);
        let mut relations: [Option<Vec<T>>; 6] = Default::default();
        for r in ids {
            relations[r.index()] = Some(read_rows(1));
        }
        Ok(Self {
            dimension,
            entities,
            relations,
            config,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> &[u8] {
        let s = &self.bytes[self.at..self.at + n];
        self.at += n;
        s
    }

    fn u8(&mut self) -> u8 {
        self.take(1)[0]
    }

    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take(4).try_into().expect("4 bytes"))
    }

    fn u64(&mut self) -> u64 {
        u64::from_le_bytes(self.take(8).try_into().expect("8 bytes"))
    }

    fn f64(&mut self) -> f64 {
        f64::from_le_bytes(self.take(8).try_into().expect("8 bytes"))
    }

    fn scalar<T: Scalar>(&mut self) -> T {
        T::read_le(self.take(T::BYTES))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::ComplexVector;

    fn model(d: usize) -> EmbeddingModel<f32> {
        let row = |i: usize| ComplexVector::from_flat((0..2 * d).map(|k| (i * 31 + k) as f32 * 0.25 - 3.0).collect());
        let entities = [(0..4).map(row).collect(), (4..9).map(row).collect(), vec![row(9)]];
        let relations = RelationType::ALL.iter().map(|&r| (r, row(20 + r.index()))).collect();
        EmbeddingModel::from_tables(d, entities, relations, TrainingConfig { seed: 77, ..Default::default() }).unwrap()
    }

    #[test]
    fn roundtrip_is_exact() {
        let m = model(4);
        let back = EmbeddingModel::<f32>::from_bytes(&m.to_bytes()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn size_matches_layout() {
        // 10 entities + 6 relations, D = 4, f32: 48 + 6 + 38 + 16·8·4 + 4
        let bytes = model(4).to_bytes();
        assert_eq!(bytes.len(), 608);
        assert_eq!(checkpoint_len(4, 4, [4, 5, 1], 6), 608);
    }

    #[test]
    fn corrupt_last_byte() {
        let mut bytes = model(4).to_bytes();
        *bytes.last_mut().unwrap() ^= 0xFF;
        assert!(matches!(EmbeddingModel::<f32>::from_bytes(&bytes), Err(Error::Checkpoint(_))));
    }

    #[test]
    fn truncated_and_version() {
        let bytes = model(2).to_bytes();
        assert!(EmbeddingModel::<f32>::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut wrong = bytes.clone();
        wrong[8] = 9;
        let err = EmbeddingModel::<f32>::from_bytes(&wrong).unwrap_err().to_string();
        assert!(err.contains("version 9"), "{err}");
        assert!(EmbeddingModel::<f64>::from_bytes(&bytes).is_err());
    }
}
