use alloc::boxed::Box;
use core::fmt;

use num_traits::{One, Zero};
use once_cell::race::OnceBox;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::Q;
use crate::spaces::{operator_norm, NormedSpace};

/// A linear map between two normed spaces, with its norm cached on first use.
pub struct Operator {
    domain: NormedSpace,
    codomain: NormedSpace,
    matrix: Matrix,
    norm: OnceBox<Q>,
}

impl Clone for Operator {
    fn clone(&self) -> Self {
        let norm = OnceBox::new();
        if let Some(n) = self.norm.get() {
            let _ = norm.set(Box::new(n.clone()));
        }
        Operator { domain: self.domain.clone(), codomain: self.codomain.clone(), matrix: self.matrix.clone(), norm }
    }
}

impl PartialEq for Operator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix && self.domain == other.domain && self.codomain == other.codomain
    }
}

impl Eq for Operator {}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} -> {:?}: {:?}", self.domain, self.codomain, self.matrix)
    }
}

impl Operator {
    pub fn new(domain: NormedSpace, codomain: NormedSpace, matrix: Matrix) -> Result<Self> {
        if matrix.cols() != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), found: matrix.cols() });
        }
        if matrix.rows() != codomain.dim() {
            return Err(Error::DimensionMismatch { expected: codomain.dim(), found: matrix.rows() });
        }
        Ok(Operator { domain, codomain, matrix, norm: OnceBox::new() })
    }

    pub fn identity(space: &NormedSpace) -> Self {
        Operator::new(space.clone(), space.clone(), Matrix::identity(space.dim())).expect("square")
    }

    pub fn zero(domain: &NormedSpace, codomain: &NormedSpace) -> Self {
        let m = Matrix::zeros(codomain.dim(), domain.dim());
        Operator::new(domain.clone(), codomain.clone(), m).expect("shape")
    }

    pub fn domain(&self) -> &NormedSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &NormedSpace {
        &self.codomain
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn apply(&self, x: &[Q]) -> alloc::vec::Vec<Q> {
        self.matrix.apply(x)
    }

    /// The same matrix between other spaces of the same dimensions.
    pub fn retarget(&self, domain: &NormedSpace, codomain: &NormedSpace) -> Result<Operator> {
        Operator::new(domain.clone(), codomain.clone(), self.matrix.clone())
    }

    /// `‖T‖ = max_v ‖Tv‖` over the vertices `v` of the domain ball.
    pub fn norm(&self) -> &Q {
        self.norm.get_or_init(|| Box::new(operator_norm(&self.domain, &self.codomain, &self.matrix)))
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &Operator) -> Result<Operator> {
        if inner.codomain != self.domain {
            return Err(Error::SpaceMismatch("composition"));
        }
        Operator::new(inner.domain.clone(), self.codomain.clone(), self.matrix.mul(&inner.matrix))
    }

    fn same_spaces(&self, other: &Operator) -> Result<()> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(Error::SpaceMismatch("sum of operators"));
        }
        Ok(())
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.same_spaces(other)?;
        Operator::new(self.domain.clone(), self.codomain.clone(), self.matrix.add(&other.matrix))
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.same_spaces(other)?;
        Operator::new(self.domain.clone(), self.codomain.clone(), self.matrix.sub(&other.matrix))
    }

    pub fn scale(&self, s: &Q) -> Operator {
        Operator::new(self.domain.clone(), self.codomain.clone(), self.matrix.scale(s)).expect("shape")
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &Operator) -> Result<Q> {
        Ok(self.sub(other)?.norm().clone())
    }

    pub fn is_injective(&self) -> bool {
        self.matrix.rank() == self.domain.dim()
    }

    /// `‖T⁻¹: T(A) → A‖` with `T(A)` normed as a subspace of the codomain.
    pub fn inverse_norm(&self) -> Result<Q> {
        if !self.is_injective() {
            return Err(Error::NotInjective);
        }
        if self.domain.dim() == 0 {
            return Ok(Q::zero());
        }
        let cols = self.matrix.col_vectors();
        let section = self.codomain.ball().section(&cols)?;
        Ok(section.vertices().iter().map(|s| self.domain.norm(s)).max().unwrap_or_else(Q::zero))
    }

    /// `(‖T‖, min_{‖x‖=1} ‖Tx‖)`. The zero-dimensional domain reports a
    /// lower constant of one.
    pub fn isometry_constants(&self) -> Result<(Q, Q)> {
        let inv = self.inverse_norm()?;
        let lower = if inv.is_zero() { Q::one() } else { inv.recip() };
        Ok((self.norm().clone(), lower))
    }

    /// The least `α ≥ 1` with `α⁻¹‖x‖ ≤ ‖Tx‖ ≤ α‖x‖`.
    pub fn isometry_alpha(&self) -> Result<Q> {
        let inv = self.inverse_norm()?;
        let mut alpha = self.norm().clone().max(inv);
        if alpha < Q::one() {
            alpha = Q::one();
        }
        Ok(alpha)
    }

    /// Whether `T` is a surjective isometry onto its codomain.
    pub fn is_onto_isometry(&self) -> bool {
        self.domain.dim() == self.codomain.dim()
            && self.is_injective()
            && self.norm().is_one()
            && self.inverse_norm().map(|n| n.is_one() || self.domain.dim() == 0).unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};
    use crate::spaces::{direct_sum, SumKind};

    #[test]
    fn norms() {
        let l1 = NormedSpace::l1(2);
        let linf = NormedSpace::linf(2);
        assert_eq!(*Operator::identity(&l1).norm(), int(1));
        let diag = Matrix::from_fn(2, 2, |r, c| if r != c { int(0) } else if r == 0 { int(2) } else { int(1) });
        assert_eq!(*Operator::new(l1.clone(), l1.clone(), diag).unwrap().norm(), int(2));
        let id = Operator::new(linf.clone(), l1.clone(), Matrix::identity(2)).unwrap();
        assert_eq!(*id.norm(), int(2));
    }

    #[test]
    fn isometry_constants_of_identity_maps() {
        let l1 = NormedSpace::l1(2);
        let linf = NormedSpace::linf(2);
        assert_eq!(Operator::identity(&l1).isometry_constants().unwrap(), (int(1), int(1)));
        let id = Operator::new(l1, linf, Matrix::identity(2)).unwrap();
        assert_eq!(id.isometry_constants().unwrap(), (int(1), frac(1, 2)));
    }

    #[test]
    fn diagonal_embedding_into_max_sum() {
        let r = NormedSpace::real();
        let sum = direct_sum(&r, &r, SumKind::LInf).unwrap();
        for eps in [int(0), frac(1, 10), frac(9, 10)] {
            let m = Matrix::from_fn(2, 1, |row, _| if row == 0 { int(1) } else { eps.clone() });
            let t = Operator::new(r.clone(), sum.clone(), m).unwrap();
            assert_eq!(t.isometry_constants().unwrap(), (int(1), int(1)));
        }
    }

    #[test]
    fn rank_deficient_is_rejected() {
        let l1 = NormedSpace::l1(2);
        let t = Operator::zero(&l1, &l1);
        assert_eq!(t.isometry_constants(), Err(Error::NotInjective));
    }
}
