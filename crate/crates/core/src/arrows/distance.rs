use alloc::format;
use alloc::vec::Vec;

use num_traits::One;

use super::{DoubleArrow, Operator};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::Q;
use crate::spaces::{vertex_matchings, NormedSpace};

/// An upper bound on the arrow metric between `d: A ↔ B` and `e: A′ ↔ B′`,
/// witnessed by invertible `a: A → A′`, `b: B → B′` with `b∘f = g∘a` and
/// `a∘f̄ = ḡ∘b` exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceBound {
    /// The least `1 + ε` for which both `a` and `b` are `(1+ε)`-isometries.
    pub distortion: Q,
    pub a: Operator,
    pub b: Operator,
    /// Best distortion among intertwiners with `‖a‖, ‖b‖ ≤ 1`, when one was seen.
    pub contractive_distortion: Option<Q>,
    pub candidates: usize,
}

impl DistanceBound {
    /// `ε = distortion − 1`; zero exactly when an isometric intertwining was found.
    pub fn eps(&self) -> Q {
        &self.distortion - Q::one()
    }
}

/// Searches intertwining pairs in a fixed order: identities, then `b` from
/// vertex matchings `B → B′` with `a = ḡbf`, then `a` from vertex matchings
/// `A → A′` combined with vertex matchings `c` of the kernels of the
/// projections, `b = g a f̄ + c∘(1 − f f̄)`. At most `budget` candidates are
/// evaluated. Both arrows must have `back∘fwd = 1`.
pub fn arrow_distance_upper(d: &DoubleArrow, e: &DoubleArrow, budget: usize) -> Result<DistanceBound> {
    let (da, db) = (d.source().dim(), d.target().dim());
    if e.source().dim() != da {
        return Err(Error::DimensionMismatch { expected: da, found: e.source().dim() });
    }
    if e.target().dim() != db {
        return Err(Error::DimensionMismatch { expected: db, found: e.target().dim() });
    }
    if !d.is_exact_projection() || !e.is_exact_projection() {
        return Err(Error::Hypothesis("arrow distance needs back*fwd = 1 on both arrows".into()));
    }
    let mut search = Search { d, e, best: None, contractive: None, candidates: 0, budget: budget.max(1) };
    search.try_pair(Matrix::identity(da), Matrix::identity(db));
    if !search.done() {
        for b in vertex_matchings(d.target(), e.target(), budget) {
            let a = e.back.matrix().mul(&b).mul(d.fwd.matrix());
            search.try_pair(a, b);
            if search.done() {
                break;
            }
        }
    }
    if !search.done() {
        kernel_family(&mut search)?;
    }
    let (distortion, a, b) = search.best.ok_or_else(|| Error::Invalid("no intertwining candidate".into()))?;
    Ok(DistanceBound { distortion, a, b, contractive_distortion: search.contractive, candidates: search.candidates })
}

struct Search<'a> {
    d: &'a DoubleArrow,
    e: &'a DoubleArrow,
    best: Option<(Q, Operator, Operator)>,
    contractive: Option<Q>,
    candidates: usize,
    budget: usize,
}

impl Search<'_> {
    fn done(&self) -> bool {
        self.candidates >= self.budget || self.best.as_ref().is_some_and(|b| b.0.is_one())
    }

    fn try_pair(&mut self, a: Matrix, b: Matrix) {
        if self.done() {
            return;
        }
        self.candidates += 1;
        let (d, e) = (self.d, self.e);
        let fwd_ok = b.mul(d.fwd.matrix()) == e.fwd.matrix().mul(&a);
        let back_ok = a.mul(d.back.matrix()) == e.back.matrix().mul(&b);
        if !fwd_ok || !back_ok || a.rank() != a.rows() || b.rank() != b.rows() {
            return;
        }
        let a = Operator::new(d.source().clone(), e.source().clone(), a).expect("shape");
        let b = Operator::new(d.target().clone(), e.target().clone(), b).expect("shape");
        let (Ok(alpha_a), Ok(alpha_b)) = (a.isometry_alpha(), b.isometry_alpha()) else {
            return;
        };
        let distortion = alpha_a.max(alpha_b);
        if *a.norm() <= Q::one() && *b.norm() <= Q::one() && self.contractive.as_ref().is_none_or(|c| distortion < *c) {
            self.contractive = Some(distortion.clone());
        }
        if self.best.as_ref().is_none_or(|best| distortion < best.0) {
            self.best = Some((distortion, a, b));
        }
    }
}

/// A basis of `ker f̄` as columns, and the coordinate map onto it.
fn kernel_frame(arrow: &DoubleArrow) -> Result<(Matrix, Matrix)> {
    let m = arrow.target().dim();
    let basis = arrow.back.matrix().nullspace();
    let n = Matrix::from_cols(&basis, m)?;
    let gram = n.transpose().mul(&n);
    let coords = gram.inverse()?.mul(&n.transpose());
    Ok((n, coords))
}

fn kernel_family(search: &mut Search<'_>) -> Result<()> {
    let (d, e) = (search.d, search.e);
    let (n, l) = kernel_frame(d)?;
    let (n2, _) = kernel_frame(e)?;
    let k = n.cols();
    let (kd, ke) = if k == 0 {
        (NormedSpace::zero(), NormedSpace::zero())
    } else {
        (
            d.target().section(&n.col_vectors(), format!("ker({})", d.target().label()))?,
            e.target().section(&n2.col_vectors(), format!("ker({})", e.target().label()))?,
        )
    };
    let complement = Matrix::identity(d.target().dim()).sub(&d.fwd.matrix().mul(d.back.matrix()));
    let to_kernel = l.mul(&complement);
    let mut firsts: Vec<Matrix> = Vec::from([Matrix::identity(d.source().dim())]);
    firsts.extend(vertex_matchings(d.source(), e.source(), search.budget));
    let mut seconds: Vec<Matrix> = Vec::from([Matrix::identity(k)]);
    seconds.extend(vertex_matchings(&kd, &ke, search.budget));
    for a in &firsts {
        let lifted = e.fwd.matrix().mul(a).mul(d.back.matrix());
        for c in &seconds {
            if search.done() {
                return Ok(());
            }
            let b = lifted.add(&n2.mul(c).mul(&to_kernel));
            search.try_pair(a.clone(), b);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use num_traits::Zero;

    fn coordinate(sign: i64) -> DoubleArrow {
        let r = NormedSpace::real();
        let l1 = NormedSpace::l1(2);
        let fwd = Matrix::from_fn(2, 1, |row, _| if row == 0 { int(sign) } else { int(0) });
        let back = Matrix::from_fn(1, 2, |_, c| if c == 0 { int(sign) } else { int(0) });
        DoubleArrow::from_matrices(&r, &l1, fwd, back).unwrap()
    }

    #[test]
    fn self_distance_is_zero() {
        let d = coordinate(1);
        let bound = arrow_distance_upper(&d, &d, 10).unwrap();
        assert!(bound.eps().is_zero());
        assert_eq!(bound.candidates, 1);
    }

    #[test]
    fn sign_conjugate_is_at_distance_zero() {
        let bound = arrow_distance_upper(&coordinate(1), &coordinate(-1), 100).unwrap();
        assert!(bound.eps().is_zero());
    }

    #[test]
    fn different_targets_give_a_finite_bound() {
        let r = NormedSpace::real();
        let linf = NormedSpace::linf(2);
        let fwd = Matrix::from_fn(2, 1, |_, _| int(1));
        let back = Matrix::from_fn(1, 2, |_, c| if c == 0 { int(1) } else { int(0) });
        let e = DoubleArrow::from_matrices(&r, &linf, fwd, back).unwrap();
        let bound = arrow_distance_upper(&coordinate(1), &e, 200).unwrap();
        assert!(bound.distortion >= Q::one());
    }
}
