//! Push-outs of operators with common domain, their universal property, and
//! the constructions built from them.

mod complemented;
mod correction;
mod multi;

use alloc::format;

use num_traits::One;

use crate::arrows::Operator;
use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::{self, Q};
use crate::spaces::{direct_sum, NormedSpace, SumKind};

pub use complemented::{complemented_pushout, ComplementedPushout, Variant};
pub use correction::{correction_double, correction_space, CorrectionDouble, CorrectionSpace};
pub use multi::{multi_pushout_extension, MultiExtension};

/// `PO = (A ⊕₁ B)/Δ` with `Δ = {(iy, −jy)}` for `i: Y → A`, `j: Y → B`.
#[derive(Clone, Debug)]
pub struct Pushout {
    pub i: Operator,
    pub j: Operator,
    /// `A ⊕₁ B`, with `A` in the leading coordinates.
    pub sum: NormedSpace,
    pub po: NormedSpace,
    /// `i′: B → PO`, `b ↦ Q(0, b)`.
    pub i_prime: Operator,
    /// `j′: A → PO`, `a ↦ Q(a, 0)`.
    pub j_prime: Operator,
    pub quotient: Operator,
    /// A right inverse of the quotient map, `PO → A ⊕₁ B`.
    pub lift: Matrix,
    pub certificate: Certificate,
}

/// Embeds `m` columns into coordinates `offset..offset + m` of `total`.
pub(crate) fn inclusion(total: usize, offset: usize, m: usize) -> Matrix {
    Matrix::from_fn(total, m, |r, c| if r == offset + c { Q::one() } else { rational::zero() })
}

/// Builds the push-out and certifies: commutativity `j′i = i′j`, both
/// induced maps contractive, `i′` an isometry when `i` is one and
/// `‖j‖ ≤ 1`, `i′` injective when `i` is, and `‖(i′)⁻¹‖ ≤ max{1, ‖i⁻¹‖}`
/// when `i` is onto and `‖j‖ ≤ 1`.
pub fn pushout(i: &Operator, j: &Operator) -> Result<Pushout> {
    if i.domain() != j.domain() {
        return Err(Error::SpaceMismatch("push-out legs need a common domain"));
    }
    if !i.is_injective() {
        return Err(Error::NotInjective);
    }
    let (a, b) = (i.codomain(), j.codomain());
    let (na, nb, ny) = (a.dim(), b.dim(), i.domain().dim());
    let sum = direct_sum(a, b, SumKind::L1)?;
    let delta = i.matrix().vstack(&j.matrix().scale(&-Q::one()));
    let (po, q, lift) = if ny == 0 {
        (sum.clone(), Matrix::identity(na + nb), Matrix::identity(na + nb))
    } else if ny == na + nb {
        (NormedSpace::zero(), Matrix::zeros(0, na + nb), Matrix::zeros(na + nb, 0))
    } else {
        let (space, map) = sum.quotient(&delta.col_vectors())?;
        (space, map.matrix, map.lift)
    };
    let po = po.relabel(format!("PO({}, {})", a.label(), b.label()));
    let quotient = Operator::new(sum.clone(), po.clone(), q.clone())?;
    let i_prime = Operator::new(b.clone(), po.clone(), q.mul(&inclusion(na + nb, na, nb)))?;
    let j_prime = Operator::new(a.clone(), po.clone(), q.mul(&inclusion(na + nb, 0, na)))?;

    let mut cert = Certificate::new();
    cert.identity("j'i = i'j", &j_prime.matrix().mul(i.matrix()), &i_prime.matrix().mul(j.matrix()));
    cert.le("|i'|", i_prime.norm().clone(), Q::one());
    cert.le("|j'|", j_prime.norm().clone(), Q::one());
    let (i_upper, i_lower) = i.isometry_constants()?;
    let j_contractive = *j.norm() <= Q::one();
    cert.flag("i' injective", i_prime.is_injective());
    if i_upper.is_one() && i_lower.is_one() && j_contractive {
        let (upper, lower) = i_prime.isometry_constants()?;
        cert.equals("i' upper", upper, Q::one());
        cert.equals("i' lower", lower, Q::one());
    }
    if ny == na && j_contractive {
        let bound = i.inverse_norm()?.max(Q::one());
        cert.le("|(i')^-1|", i_prime.inverse_norm()?, bound);
    }
    Ok(Pushout { i: i.clone(), j: j.clone(), sum, po, i_prime, j_prime, quotient, lift, certificate: cert })
}

impl Pushout {
    /// The unique `γ: PO → C` with `γi′ = i2` and `γj′ = j2`, for
    /// `j2: A → C`, `i2: B → C` satisfying `j2∘i = i2∘j`.
    pub fn factor(&self, j2: &Operator, i2: &Operator) -> Result<(Operator, Certificate)> {
        if j2.domain() != self.i.codomain() || i2.domain() != self.j.codomain() || j2.codomain() != i2.codomain() {
            return Err(Error::SpaceMismatch("factoring pair"));
        }
        if j2.matrix().mul(self.i.matrix()) != i2.matrix().mul(self.j.matrix()) {
            return Err(Error::NotCommuting("j2 i != i2 j"));
        }
        let on_sum = j2.matrix().hstack(i2.matrix());
        let gamma = Operator::new(self.po.clone(), j2.codomain().clone(), on_sum.mul(&self.lift))?;
        let mut cert = Certificate::new();
        cert.identity("gamma i' = i2", &gamma.matrix().mul(self.i_prime.matrix()), i2.matrix());
        cert.identity("gamma j' = j2", &gamma.matrix().mul(self.j_prime.matrix()), j2.matrix());
        cert.le("|gamma|", gamma.norm().clone(), i2.norm().clone().max(j2.norm().clone()));
        Ok((gamma, cert))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};
    use crate::spaces::bm_upper;

    fn op(domain: &NormedSpace, codomain: &NormedSpace, entries: &[i64]) -> Operator {
        let m = Matrix::from_fn(codomain.dim(), domain.dim(), |r, c| int(entries[r * domain.dim() + c]));
        Operator::new(domain.clone(), codomain.clone(), m).unwrap()
    }

    #[test]
    fn identities_on_the_line() {
        let r = NormedSpace::real();
        let id = Operator::identity(&r);
        let po = pushout(&id, &id).unwrap();
        assert_eq!(po.po.dim(), 1);
        assert!(po.certificate.all_hold());
        assert!(po.i_prime.is_onto_isometry() && po.j_prime.is_onto_isometry());
    }

    #[test]
    fn coordinate_line_against_identity() {
        let r = NormedSpace::real();
        let l1 = NormedSpace::l1(2);
        let i = op(&r, &l1, &[1, 0]);
        let po = pushout(&i, &Operator::identity(&r)).unwrap();
        assert!(po.certificate.all_hold());
        assert_eq!(po.po.dim(), 2);
        assert!(bm_upper(&po.po, &l1, 50).unwrap().0.is_one());
        assert_eq!(po.i_prime.isometry_constants().unwrap(), (int(1), int(1)));
    }

    #[test]
    fn factoring_recovers_the_legs() {
        let r = NormedSpace::real();
        let l1 = NormedSpace::l1(2);
        let i = op(&r, &l1, &[1, 0]);
        let j = Operator::new(r.clone(), r.clone(), Matrix::from_fn(1, 1, |_, _| frac(1, 2))).unwrap();
        let po = pushout(&i, &j).unwrap();
        let (gamma, cert) = po.factor(&po.j_prime, &po.i_prime).unwrap();
        assert!(cert.all_hold());
        assert!(gamma.matrix().is_identity());
        let bad = po.factor(&Operator::identity(&l1), &op(&r, &l1, &[0, 1]));
        assert_eq!(bad.unwrap_err(), Error::NotCommuting("j2 i != i2 j"));
    }
}
