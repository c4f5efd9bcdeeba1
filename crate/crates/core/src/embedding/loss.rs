//! Margin ranking loss and its analytic gradient.
//!
//! For a positive triple `e` and negatives `e'_j` sharing its relation the
//! loss is `Σ_j max(λ - f(e) + f(e'_j), 0)`: zero once the positive outscores
//! every negative by at least the margin `λ`.

use super::complex::{ComplexVector, TripleScorer};
use crate::scalar::Scalar;

pub fn margin_loss<T: Scalar>(positive: T, negatives: &[T], margin: T) -> T {
    negatives
        .iter()
        .map(|&n| (margin - positive + n).max(T::zero()))
        .fold(T::zero(), |a, b| a + b)
}

/// Source and destination slots of a triple inside an entity arena.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TripleSlots {
    pub source: usize,
    pub destination: usize,
}

impl TripleSlots {
    pub fn new(source: usize, destination: usize) -> Self {
        Self {
            source,
            destination,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HingeOutcome<T> {
    pub loss: T,
    /// Number of hinge terms with positive loss.
    pub active: usize,
}

fn row<T>(buf: &[T], slot: usize, width: usize) -> &[T] {
    &buf[slot * width..(slot + 1) * width]
}

// Adds `coef * ∂f` for one triple, splitting `grads` so the source and
// destination rows can be borrowed mutably at the same time.
#[allow(clippy::too_many_arguments)]
fn add_pair_gradient<T: Scalar, S: TripleScorer<T> + ?Sized>(
    scorer: &S,
    rows: &[T],
    width: usize,
    relation: &[T],
    slots: TripleSlots,
    coef: T,
    grads: &mut [T],
    grad_relation: &mut [T],
    scratch: &mut Vec<T>,
) {
    let s = row(rows, slots.source, width);
    let d = row(rows, slots.destination, width);
    if slots.source == slots.destination {
        scratch.clear();
        scratch.resize(2 * width, T::zero());
        let (gs, gd) = scratch.split_at_mut(width);
        scorer.accumulate_gradient(s, relation, d, coef, gs, grad_relation, gd);
        let g = &mut grads[slots.source * width..(slots.source + 1) * width];
        for k in 0..width {
            g[k] += gs[k] + gd[k];
        }
        return;
    }
    let (lo, hi) = if slots.source < slots.destination {
        (slots.source, slots.destination)
    } else {
        (slots.destination, slots.source)
    };
    let (head, tail) = grads.split_at_mut(hi * width);
    let g_lo = &mut head[lo * width..(lo + 1) * width];
    let g_hi = &mut tail[..width];
    let (gs, gd) = if slots.source == lo {
        (g_lo, g_hi)
    } else {
        (g_hi, g_lo)
    };
    scorer.accumulate_gradient(s, relation, d, coef, gs, grad_relation, gd);
}

/// Loss and gradient of one positive against its negatives.
///
/// `rows` is a flat arena of complex rows (`width = 2D` values each);
/// gradients are *added* into `grads` (same layout) and `grad_relation`.
/// Inactive hinge terms contribute nothing, including at the kink.
#[allow(clippy::too_many_arguments)]
pub fn hinge_gradients<T: Scalar, S: TripleScorer<T> + ?Sized>(
    scorer: &S,
    rows: &[T],
    width: usize,
    relation: &[T],
    positive: TripleSlots,
    negatives: &[TripleSlots],
    margin: T,
    grads: &mut [T],
    grad_relation: &mut [T],
    scratch: &mut Vec<T>,
) -> HingeOutcome<T> {
    let pos_score = scorer.score(
        row(rows, positive.source, width),
        relation,
        row(rows, positive.destination, width),
    );
    let mut loss = T::zero();
    let mut active = 0;
    for &neg in negatives {
        let neg_score = scorer.score(
            row(rows, neg.source, width),
            relation,
            row(rows, neg.destination, width),
        );
        let term = margin - pos_score + neg_score;
        if term > T::zero() {
            loss += term;
            active += 1;
            add_pair_gradient(scorer, rows, width, relation, neg, T::one(), grads, grad_relation, scratch);
        }
    }
    if active > 0 {
        let coef = -T::from_usize(active).expect("small count");
        add_pair_gradient(scorer, rows, width, relation, positive, coef, grads, grad_relation, scratch);
    }
    HingeOutcome { loss, active }
}

/// Loss only, over the same arena layout. Used as the finite-difference
/// target for the analytic gradient.
pub fn hinge_loss<T: Scalar, S: TripleScorer<T> + ?Sized>(
    scorer: &S,
    rows: &[T],
    width: usize,
    relation: &[T],
    positive: TripleSlots,
    negatives: &[TripleSlots],
    margin: T,
) -> T {
    let pos = scorer.score(row(rows, positive.source, width), relation, row(rows, positive.destination, width));
    let negs: Vec<T> = negatives
        .iter()
        .map(|n| scorer.score(row(rows, n.source, width), relation, row(rows, n.destination, width)))
        .collect();
    margin_loss(pos, &negs, margin)
}

/// One SGD step on an explicit set of vectors.
///
/// `entities` holds every entity vector that appears in the positive or in a
/// negative; triples refer to them by index, so a negative that reuses the
/// positive's source points at the same slot and receives the summed gradient.
pub fn gradient_step<T: Scalar, S: TripleScorer<T> + ?Sized>(
    scorer: &S,
    entities: &mut [ComplexVector<T>],
    relation: &mut ComplexVector<T>,
    positive: TripleSlots,
    negatives: &[TripleSlots],
    margin: T,
    learning_rate: T,
) -> HingeOutcome<T> {
    let width = relation.as_flat().len();
    let rows: Vec<T> = entities.iter().flat_map(|e| e.as_flat().iter().copied()).collect();
    let mut grads = vec![T::zero(); rows.len()];
    let mut grad_relation = vec![T::zero(); width];
    let outcome = hinge_gradients(
        scorer,
        &rows,
        width,
        relation.as_flat(),
        positive,
        negatives,
        margin,
        &mut grads,
        &mut grad_relation,
        &mut Vec::new(),
    );
    if outcome.active == 0 {
        return outcome;
    }
    for (e, g) in entities.iter_mut().zip(grads.chunks(width)) {
        for (v, &gv) in e.as_flat_mut().iter_mut().zip(g) {
            *v -= learning_rate * gv;
        }
    }
    for (v, &gv) in relation.as_flat_mut().iter_mut().zip(&grad_relation) {
        *v -= learning_rate * gv;
    }
    outcome
}
