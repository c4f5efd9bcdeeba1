//! Complex vectors stored flat as `[re_0 .. re_{D-1}, im_0 .. im_{D-1}]`.
//!
//! The flat layout doubles as the real-vector view used for cosine
//! similarity, so flattening is free.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexVector<T> {
    parts: Vec<T>,
}

impl<T: Scalar> ComplexVector<T> {
    pub fn new(re: Vec<T>, im: Vec<T>) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::DimensionMismatch {
                left: re.len(),
                right: im.len(),
            });
        }
        let mut parts = re;
        parts.extend(im);
        Ok(Self { parts })
    }

    pub fn zeros(dimension: usize) -> Self {
        Self {
            parts: vec![T::zero(); 2 * dimension],
        }
    }

    /// Every component equal to `1 + 0i`.
    pub fn ones(dimension: usize) -> Self {
        let mut parts = vec![T::zero(); 2 * dimension];
        parts[..dimension].fill(T::one());
        Self { parts }
    }

    /// Wraps a flat `[re.., im..]` buffer. Panics on odd length.
    pub fn from_flat(parts: Vec<T>) -> Self {
        assert!(parts.len().is_multiple_of(2), "flat complex buffer must have even length");
        Self { parts }
    }

    pub fn from_pairs(pairs: &[(T, T)]) -> Self {
        let re = pairs.iter().map(|p| p.0).collect();
        let im = pairs.iter().map(|p| p.1).collect();
        Self::new(re, im).expect("equal lengths")
    }

    pub fn dimension(&self) -> usize {
        self.parts.len() / 2
    }

    pub fn re(&self) -> &[T] {
        &self.parts[..self.dimension()]
    }

    pub fn im(&self) -> &[T] {
        &self.parts[self.dimension()..]
    }

    pub fn as_flat(&self) -> &[T] {
        &self.parts
    }

    pub fn as_flat_mut(&mut self) -> &mut [T] {
        &mut self.parts
    }

    /// Real vector `[re.., im..]` of length 2D.
    pub fn flatten(&self) -> Vec<T> {
        self.parts.clone()
    }

    pub fn into_flat(self) -> Vec<T> {
        self.parts
    }

    pub fn is_finite(&self) -> bool {
        self.parts.iter().all(|v| v.is_finite())
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left: a, right: b })
    }
}

/// Component-wise complex product.
pub fn transform<T: Scalar>(
    entity: &ComplexVector<T>,
    relation: &ComplexVector<T>,
) -> Result<ComplexVector<T>> {
    check_dims(entity.dimension(), relation.dimension())?;
    let d = entity.dimension();
    let (er, ei) = (entity.re(), entity.im());
    let (rr, ri) = (relation.re(), relation.im());
    let mut parts = vec![T::zero(); 2 * d];
    for k in 0..d {
        parts[k] = er[k] * rr[k] - ei[k] * ri[k];
        parts[d + k] = er[k] * ri[k] + ei[k] * rr[k];
    }
    Ok(ComplexVector { parts })
}

/// `Re(<a, conj(b)>)`.
pub fn complex_similarity<T: Scalar>(a: &ComplexVector<T>, b: &ComplexVector<T>) -> Result<T> {
    check_dims(a.dimension(), b.dimension())?;
    Ok(flat_dot(a.as_flat(), b.as_flat()))
}

pub(crate) fn flat_dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// A triple fitness function together with its gradient.
///
/// All slices are flat complex rows of equal length.
pub trait TripleScorer<T: Scalar>: Send + Sync {
    fn name(&self) -> &'static str;

    fn score(&self, source: &[T], relation: &[T], destination: &[T]) -> T;

    /// Adds `coef * ∂f/∂θ` for each of the three parameter rows.
    #[allow(clippy::too_many_arguments)]
    fn accumulate_gradient(
        &self,
        source: &[T],
        relation: &[T],
        destination: &[T],
        coef: T,
        grad_source: &mut [T],
        grad_relation: &mut [T],
        grad_destination: &mut [T],
    );
}

/// `f(s, r, d) = Re(<s ⊙ r, conj(d ⊙ r)>)`.
///
/// Expanding the product gives `Σ_k |r_k|² · Re(s_k conj(d_k))`, which is what
/// both methods evaluate.
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexDiagonal;

impl<T: Scalar> TripleScorer<T> for ComplexDiagonal {
    fn name(&self) -> &'static str {
        "complex-diagonal"
    }

    fn score(&self, s: &[T], r: &[T], d: &[T]) -> T {
        let dim = s.len() / 2;
        let mut total = T::zero();
        for k in 0..dim {
            let w = r[k] * r[k] + r[dim + k] * r[dim + k];
            let p = s[k] * d[k] + s[dim + k] * d[dim + k];
            total += w * p;
        }
        total
    }

    fn accumulate_gradient(
        &self,
        s: &[T],
        r: &[T],
        d: &[T],
        coef: T,
        gs: &mut [T],
        gr: &mut [T],
        gd: &mut [T],
    ) {
        let dim = s.len() / 2;
        let two = T::one() + T::one();
        for k in 0..dim {
            let (rr, ri) = (r[k], r[dim + k]);
            let w = (rr * rr + ri * ri) * coef;
            let p = s[k] * d[k] + s[dim + k] * d[dim + k];
            gs[k] += w * d[k];
            gs[dim + k] += w * d[dim + k];
            gd[k] += w * s[k];
            gd[dim + k] += w * s[dim + k];
            let q = two * p * coef;
            gr[k] += q * rr;
            gr[dim + k] += q * ri;
        }
    }
}

/// Fitness of (source, relation, destination) under the complex-diagonal scorer.
pub fn score_vectors<T: Scalar>(
    source: &ComplexVector<T>,
    relation: &ComplexVector<T>,
    destination: &ComplexVector<T>,
) -> Result<T> {
    check_dims(source.dimension(), relation.dimension())?;
    check_dims(destination.dimension(), relation.dimension())?;
    Ok(ComplexDiagonal.score(source.as_flat(), relation.as_flat(), destination.as_flat()))
}
