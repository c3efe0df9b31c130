use num_traits::One;

use super::{complemented_pushout, inclusion, pushout, ComplementedPushout, Pushout, Variant};
use crate::arrows::{ArrowClass, DoubleArrow, Operator};
use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::Q;
use crate::spaces::{direct_sum, SumKind};

/// Extension of `(j₁, j̄₁)` through the push-out of `i₁ ⊕ i₂` against
/// `j₁ + j₂`.
#[derive(Clone, Debug)]
pub struct MultiExtension {
    /// The push-out of `i₁ ⊕ i₂: A₁ ⊕₁ A₂ → B₁ ⊕₁ B₂` and `j₁ + j₂`.
    pub main: Pushout,
    /// The complemented push-out of `(i₁, ī₁)` and `(j₁, j̄₁)`.
    pub first: ComplementedPushout,
    /// The push-out of `i₂` and `i₁′j₂`, absent for a single factor.
    pub second: Option<Pushout>,
    /// `τ: PO → P₂`.
    pub tau: Operator,
    /// `(J|B₁, j̄₁′ī₂′τ): B₁ ↔ PO`.
    pub j_b1: DoubleArrow,
    /// `((i₁ ⊕ i₂)′, its back map): X ↔ PO`.
    pub po_arrow: DoubleArrow,
    pub class: ArrowClass,
    pub certificate: Certificate,
}

/// Builds the staged push-outs and certifies the extension class
/// `(u, v, max{w, 1+v}·u·max{1, ‖j₂‖})` (contractive) and
/// `ī₁ J̄|B₁ = j̄₁ (i₁ ⊕ i₂)′‾`. Without a second factor the result is the
/// complemented push-out of `d1` and `dj1`.
pub fn multi_pushout_extension(
    d1: &DoubleArrow,
    second: Option<(&DoubleArrow, &Operator)>,
    dj1: &DoubleArrow,
) -> Result<MultiExtension> {
    let c1 = d1.classify()?;
    if !c1.is_double() {
        return Err(Error::Hypothesis("the first factor must be a (1,0,1)-arrow".into()));
    }
    let first = complemented_pushout(d1, dj1, Variant::Standard)?;
    let cj = dj1.classify()?;
    let mut cert = Certificate::new();
    cert.absorb("first", first.certificate.clone());
    let Some((d2, j2)) = second else {
        let bound = bound_class(&cj, &Q::one());
        first.dj_class.certify_within(&mut cert, "J|B1", &bound);
        return Ok(MultiExtension {
            main: first.pushout.clone(),
            second: None,
            tau: Operator::identity(&first.pushout.po),
            j_b1: first.dj_prime.clone(),
            po_arrow: first.di_prime.clone(),
            class: first.dj_class.clone(),
            first,
            certificate: cert,
        });
    };
    if !d2.classify()?.is_double() {
        return Err(Error::Hypothesis("the second factor must be a (1,0,1)-arrow".into()));
    }
    let x = dj1.target();
    if j2.domain() != d2.source() || j2.codomain() != x {
        return Err(Error::SpaceMismatch("j2 must map A2 into X"));
    }
    let (i1, i2) = (&d1.fwd, &d2.fwd);
    let (b1, b2) = (d1.target(), d2.target());
    let i1p = &first.pushout.i_prime;

    let i1p_j2 = i1p.after(j2)?;
    let p2 = pushout(i2, &i1p_j2)?;
    cert.absorb("second", p2.certificate.clone());
    let p1 = &first.pushout.po;
    let (i2p_bar, c) = p2.factor(&i1p_j2.after(&d2.back)?, &Operator::identity(p1))?;
    cert.absorb("factor ibar2'", c);
    let (i2p, i1pj2p) = (&p2.i_prime, &p2.j_prime);

    let a_sum = direct_sum(d1.source(), d2.source(), SumKind::L1)?;
    let b_sum = direct_sum(b1, b2, SumKind::L1)?;
    let i_sum = Operator::new(a_sum.clone(), b_sum.clone(), i1.matrix().block_diag(i2.matrix()))?;
    let back_sum = Operator::new(b_sum.clone(), a_sum.clone(), d1.back.matrix().block_diag(d2.back.matrix()))?;
    let j_sum = Operator::new(a_sum, x.clone(), dj1.fwd.matrix().hstack(j2.matrix()))?;
    let main = pushout(&i_sum, &j_sum)?;
    cert.absorb("main", main.certificate.clone());

    let j1p = &first.pushout.j_prime;
    let on_b = Operator::new(b_sum.clone(), p2.po.clone(), i2p.after(j1p)?.matrix().hstack(i1pj2p.matrix()))?;
    let (tau, c) = main.factor(&on_b, &i2p.after(i1p)?)?;
    cert.absorb("factor tau", c);
    cert.le("|tau|", tau.norm().clone(), Q::one());

    let (nb1, nb2) = (b1.dim(), b2.dim());
    let j_restricted = Operator::new(b1.clone(), main.po.clone(), main.j_prime.matrix().mul(&inclusion(nb1 + nb2, 0, nb1)))?;
    let j_bar = first.dj_prime.back.after(&i2p_bar)?.after(&tau)?;
    let j_b1 = DoubleArrow::new(j_restricted, j_bar)?;

    let (po_bar, c) = main.factor(&j_sum.after(&back_sum)?, &Operator::identity(x))?;
    cert.absorb("factor (i1+i2)' back", c);
    let po_arrow = DoubleArrow::new(main.i_prime.clone(), po_bar)?;

    let class = j_b1.classify()?;
    class.certify_within(&mut cert, "J|B1", &bound_class(&cj, j2.norm()));
    cert.identity(
        "ibar1 Jbar = jbar1 (i1+i2)'-bar",
        d1.back.after(&j_b1.back)?.matrix(),
        dj1.back.after(&po_arrow.back)?.matrix(),
    );
    cert.identity("ibar2' i2' = 1", i2p_bar.after(i2p)?.matrix(), &Matrix::identity(p1.dim()));
    Ok(MultiExtension { main, first, second: Some(p2), tau, j_b1, po_arrow, class, certificate: cert })
}

/// `(u, v, max{w, 1+v}·u·max{1, ‖j₂‖})`, contractive.
fn bound_class(cj: &ArrowClass, j2_norm: &Q) -> ArrowClass {
    let one = Q::one();
    let gamma = cj.gamma.clone().max(&one + &cj.beta) * &cj.alpha * j2_norm.clone().max(one);
    ArrowClass::new(cj.alpha.clone(), cj.beta.clone(), gamma, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::spaces::NormedSpace;

    #[test]
    fn identities_on_the_line() {
        let r = NormedSpace::real();
        let id = DoubleArrow::identity(&r);
        let out = multi_pushout_extension(&id, Some((&id, &Operator::identity(&r))), &id).unwrap();
        assert!(out.certificate.all_hold(), "{:?}", out.certificate.failures().collect::<alloc::vec::Vec<_>>());
        assert_eq!(out.main.po.dim(), 1);
        assert!(out.class.is_double());
    }

    #[test]
    fn single_factor_matches_complemented_pushout() {
        let r = NormedSpace::real();
        let l1 = NormedSpace::l1(2);
        let fwd = Matrix::from_fn(2, 1, |row, _| int(1 - row as i64));
        let d1 = DoubleArrow::from_matrices(&r, &l1, fwd.clone(), fwd.transpose()).unwrap();
        let dj = DoubleArrow::identity(&r);
        let multi = multi_pushout_extension(&d1, None, &dj).unwrap();
        let single = complemented_pushout(&d1, &dj, Variant::Standard).unwrap();
        assert_eq!(multi.j_b1, single.dj_prime);
        assert_eq!(multi.po_arrow, single.di_prime);
    }
}
