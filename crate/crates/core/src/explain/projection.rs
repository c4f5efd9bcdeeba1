use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::graph::{NodeId, NodeKind};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectedUser {
    pub user: NodeId,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Projection2D {
    pub method: String,
    pub seed: u64,
    /// One point per requested user, in request order.
    pub coords: Vec<ProjectedUser>,
    pub fit_metadata: serde_json::Value,
}

/// Maps `n` equally long real rows to `n` planar points.
pub trait Projector {
    fn method(&self) -> &str;

    /// Points plus a serialized description of the fitted transform.
    fn project(&self, rows: &[Vec<f64>], seed: u64) -> Result<(Vec<[f64; 2]>, serde_json::Value)>;
}

/// Principal components of the centered rows.
///
/// Each component's sign is fixed so that its first loading with magnitude
/// above `1e-12` is positive. The seed is not used.
#[derive(Clone, Copy, Debug, Default)]
pub struct PcaProjector;

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct PcaFit<'a> {
    mean: &'a [f64],
    components: [Vec<f64>; 2],
    singular_values: [f64; 2],
}

impl Projector for PcaProjector {
    fn method(&self) -> &str {
        "pca"
    }

    fn project(&self, rows: &[Vec<f64>], _seed: u64) -> Result<(Vec<[f64; 2]>, serde_json::Value)> {
        let n = rows.len();
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Invalid("projection rows differ in length".into()));
        }
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v / n as f64;
            }
        }
        let x = DMatrix::from_fn(n, dim, |i, j| rows[i][j] - mean[j]);
        let svd = x.clone().svd(false, true);
        let v_t = svd.v_t.ok_or_else(|| Error::Invalid("singular value decomposition failed".into()))?;
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));

        let mut components: [Vec<f64>; 2] = [vec![0.0; dim], vec![0.0; dim]];
        let mut singular = [0.0; 2];
        for (c, &k) in order.iter().take(2).enumerate() {
            let mut v: Vec<f64> = v_t.row(k).iter().copied().collect();
            if v.iter().find(|a| a.abs() > 1e-12).is_some_and(|&a| a < 0.0) {
                v.iter_mut().for_each(|a| *a = -*a);
            }
            components[c] = v;
            singular[c] = svd.singular_values[k];
        }
        let points = (0..n)
            .map(|i| {
                let row = x.row(i);
                let dot = |c: &[f64]| row.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
                [dot(&components[0]), dot(&components[1])]
            })
            .collect();
        let fit = serde_json::to_value(PcaFit {
            mean: &mean,
            components,
            singular_values: singular,
        })
        .expect("fit serializes");
        Ok((points, fit))
    }
}

pub fn project_users_2d<T: Scalar>(model: &EmbeddingModel<T>, users: &[NodeId], seed: u64) -> Result<Projection2D> {
    project_with(&PcaProjector, model, users, seed)
}

/// Projects the flattened embeddings of `users` with `projector`.
pub fn project_with<T: Scalar, P: Projector + ?Sized>(
    projector: &P,
    model: &EmbeddingModel<T>,
    users: &[NodeId],
    seed: u64,
) -> Result<Projection2D> {
    if users.len() < 2 {
        return Err(Error::Invalid(format!("projection needs at least 2 users, got {}", users.len())));
    }
    let mut rows = Vec::with_capacity(users.len());
    for &u in users {
        if u.kind != NodeKind::User {
            return Err(Error::Invalid(format!("expected a user node, got a {}", u.kind)));
        }
        rows.push(model.entity_row(u)?.iter().map(|v| v.as_f64()).collect::<Vec<_>>());
    }
    let (points, fit_metadata) = projector.project(&rows, seed)?;
    if points.len() != users.len() || points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Invalid(format!("projector `{}` returned unusable points", projector.method())));
    }
    Ok(Projection2D {
        method: projector.method().to_owned(),
        seed,
        coords: users
            .iter()
            .zip(points)
            .map(|(&user, [x, y])| ProjectedUser { user, x, y })
            .collect(),
        fit_metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{ComplexVector, TrainingConfig};

    fn model(rows: Vec<Vec<f64>>) -> EmbeddingModel<f64> {
        let d = rows[0].len() / 2;
        let users = rows.into_iter().map(ComplexVector::from_flat).collect();
        EmbeddingModel::from_tables(d, [users, vec![], vec![]], vec![], TrainingConfig::default()).unwrap()
    }

    fn ids(n: u32) -> Vec<NodeId> {
        (0..n).map(NodeId::user).collect()
    }

    #[test]
    fn line_has_flat_second_axis() {
        let m = model((0..6).map(|t| vec![t as f64, 2.0 * t as f64, -1.0, 0.5 * t as f64]).collect());
        let p = project_users_2d(&m, &ids(6), 0).unwrap();
        assert_eq!(p.method, "pca");
        for c in &p.coords {
            assert!(c.y.abs() < 1e-8, "{c:?}");
        }
        let xs: Vec<f64> = p.coords.iter().map(|c| c.x).collect();
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn duplicates_coincide_and_repeat() {
        let m = model(vec![vec![1.0, 2.0], vec![1.0, 2.0], vec![-3.0, 0.5], vec![0.0, 4.0]]);
        let p = project_users_2d(&m, &ids(4), 7).unwrap();
        assert_eq!((p.coords[0].x, p.coords[0].y), (p.coords[1].x, p.coords[1].y));
        assert_eq!(p, project_users_2d(&m, &ids(4), 7).unwrap());
    }

    #[test]
    fn needs_two_users() {
        let m = model(vec![vec![1.0, 2.0], vec![0.0, 1.0]]);
        assert!(project_users_2d(&m, &ids(1), 0).is_err());
        assert!(project_users_2d(&m, &[NodeId::user(0), NodeId::user(5)], 0).is_err());
    }

    #[test]
    fn sign_convention() {
        let m = model(vec![vec![2.0, 0.0], vec![-2.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]]);
        let p = project_users_2d(&m, &ids(4), 0).unwrap();
        assert!((p.coords[0].x - 2.0).abs() < 1e-12);
        assert!((p.coords[2].y - 1.0).abs() < 1e-12);
    }
}
