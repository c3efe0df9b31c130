use num_traits::{One, Zero};

use super::{pushout, Pushout};
use crate::arrows::{ArrowClass, DoubleArrow, Operator};
use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::rational::Q;

/// Which factoring data produces the back maps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// `j̄′` from `(ij̄, 1_B + i(j̄j − 1)ī)`.
    Standard,
    /// `j̄′` from `(ij̄, 1_B)`; needs `j̄j = 1` and makes the square commute
    /// in both directions.
    Kubis,
}

/// The push-out of `i: A → B` and `j: A → X` with back maps
/// `ī′: PO → X` and `j̄′: PO → B`.
#[derive(Clone, Debug)]
pub struct ComplementedPushout {
    pub pushout: Pushout,
    /// `(i′, ī′): X ↔ PO`.
    pub di_prime: DoubleArrow,
    /// `(j′, j̄′): B ↔ PO`.
    pub dj_prime: DoubleArrow,
    /// `j̄ī′ = īj̄′: PO → A`.
    pub gamma: Operator,
    pub di_class: ArrowClass,
    pub dj_class: ArrowClass,
    pub variant: Variant,
    pub certificate: Certificate,
}

/// Complements the push-out of `di = (i, ī): A ↔ B` (with `īi = 1`) and
/// `dj = (j, j̄): A ↔ X`.
///
/// The certificate holds the factoring identities, the class table
/// `(uα, 0, uγ)`, `(uα, αvγ, max{wα, 1 + αvγ})` (both contractive) and,
/// when `di` is `(1,0,1)` and `j` contractive, the sharper `(1,0,1)`,
/// `(u, v, max{w, 1+v})`. Here `γ` enters as `max{γ, 1}`: `ī′i′ = 1` and
/// `‖i′‖ ≤ 1` force `‖ī′‖ ≥ 1`.
pub fn complemented_pushout(di: &DoubleArrow, dj: &DoubleArrow, variant: Variant) -> Result<ComplementedPushout> {
    if di.source() != dj.source() {
        return Err(Error::SpaceMismatch("arrows need a common source"));
    }
    let ci = di.classify()?;
    let cj = dj.classify()?;
    if !ci.beta.is_zero() {
        return Err(Error::Hypothesis("the push-out arrow must satisfy back*fwd = 1".into()));
    }
    let (i, i_bar, j, j_bar) = (&di.fwd, &di.back, &dj.fwd, &dj.back);
    let (b, x) = (di.target(), dj.target());
    let po = pushout(i, j)?;
    let mut cert = Certificate::new();
    cert.absorb("pushout", po.certificate.clone());

    let j_ibar = j.after(i_bar)?;
    let (i_bar_prime, c4) = po.factor(&j_ibar, &Operator::identity(x))?;
    cert.absorb("factor (1_X, j ibar)", c4);

    let i_jbar = i.after(j_bar)?;
    let one_b = Operator::identity(b);
    let a_defect = j_bar.after(j)?.sub(&Operator::identity(di.source()))?;
    let corrected = one_b.add(&i.after(&a_defect)?.after(i_bar)?)?;
    let slot_b = match variant {
        Variant::Standard => corrected.clone(),
        Variant::Kubis => one_b.clone(),
    };
    let (j_bar_prime, c3) = po.factor(&slot_b, &i_jbar)?;
    cert.absorb("factor (i jbar, B slot)", c3);

    let slot_a = match variant {
        Variant::Standard => j_bar.after(j)?.after(i_bar)?,
        Variant::Kubis => i_bar.clone(),
    };
    let (gamma, c5) = po.factor(&slot_a, j_bar)?;
    cert.absorb("factor (jbar, A slot)", c5);

    let (ip, jp) = (&po.i_prime, &po.j_prime);
    cert.identity("(3.a) jbar' i' = i jbar", j_bar_prime.after(ip)?.matrix(), i_jbar.matrix());
    cert.identity("(3.b) jbar' j' = B slot", j_bar_prime.after(jp)?.matrix(), slot_b.matrix());
    if variant == Variant::Kubis {
        cert.identity("(3.b) standard slot agrees", corrected.matrix(), one_b.matrix());
    }
    cert.identity("(4.a) ibar' i' = 1", i_bar_prime.after(ip)?.matrix(), Operator::identity(x).matrix());
    cert.identity("(4.b) ibar' j' = j ibar", i_bar_prime.after(jp)?.matrix(), j_ibar.matrix());
    cert.identity("(5) jbar ibar' = ibar jbar'", j_bar.after(&i_bar_prime)?.matrix(), i_bar.after(&j_bar_prime)?.matrix());
    cert.identity("(5) gamma = jbar ibar'", gamma.matrix(), j_bar.after(&i_bar_prime)?.matrix());

    let di_prime = DoubleArrow::new(ip.clone(), i_bar_prime)?;
    let dj_prime = DoubleArrow::new(jp.clone(), j_bar_prime)?;
    let di_class = di_prime.classify()?;
    let dj_class = dj_prime.classify()?;
    let (alpha, gamma_i) = (&ci.alpha, ci.gamma.clone().max(Q::one()));
    let (u, v, w) = (&cj.alpha, &cj.beta, &cj.gamma);
    let one = Q::one();
    let avg = alpha * v * &gamma_i;
    let table_i = ArrowClass::new(u * alpha, Q::zero(), u * &gamma_i, true);
    let table_j = ArrowClass::new(u * alpha, avg.clone(), (w * alpha).max(&one + &avg), true);
    di_class.certify_within(&mut cert, "general i'", &table_i);
    dj_class.certify_within(&mut cert, "general j'", &table_j);
    if ci.is_double() && cj.contractive {
        cert.flag("sharp i' is (1,0,1)", di_class.is_double());
        let sharp = ArrowClass::new(u.clone(), v.clone(), w.clone().max(&one + v), true);
        dj_class.certify_within(&mut cert, "sharp j'", &sharp);
    }
    Ok(ComplementedPushout { pushout: po, di_prime, dj_prime, gamma, di_class, dj_class, variant, certificate: cert })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::rational::{frac, int};
    use crate::spaces::NormedSpace;

    fn arrow(a: &NormedSpace, b: &NormedSpace, fwd: &[Q], back: &[Q]) -> DoubleArrow {
        let f = Matrix::from_fn(b.dim(), a.dim(), |r, c| fwd[r * a.dim() + c].clone());
        let g = Matrix::from_fn(a.dim(), b.dim(), |r, c| back[r * b.dim() + c].clone());
        DoubleArrow::from_matrices(a, b, f, g).unwrap()
    }

    #[test]
    fn identities_on_the_line() {
        let r = NormedSpace::real();
        let id = DoubleArrow::identity(&r);
        let out = complemented_pushout(&id, &id, Variant::Standard).unwrap();
        assert!(out.certificate.all_hold(), "{:?}", out.certificate.failures().collect::<alloc::vec::Vec<_>>());
        assert!(out.di_class.is_double() && out.dj_class.is_double());
    }

    #[test]
    fn coordinate_arrow_against_contractive_almost_arrow() {
        let r = NormedSpace::real();
        let l1 = NormedSpace::l1(2);
        let linf = NormedSpace::linf(2);
        let di = arrow(&r, &l1, &[int(1), int(0)], &[int(1), int(0)]);
        let dj = arrow(&r, &linf, &[int(1), frac(1, 2)], &[frac(9, 10), int(0)]);
        for variant in [Variant::Standard, Variant::Kubis] {
            let out = complemented_pushout(&di, &dj, variant);
            match variant {
                Variant::Standard => {
                    let out = out.unwrap();
                    assert!(out.certificate.all_hold(), "{:?}", out.certificate.failures().collect::<alloc::vec::Vec<_>>());
                    assert!(out.di_class.is_double());
                }
                // jbar j != 1, so the Kubis slot does not commute.
                Variant::Kubis => assert!(matches!(out, Err(Error::NotCommuting(_)))),
            }
        }
    }

    #[test]
    fn kubis_variant_with_exact_projections() {
        let r = NormedSpace::real();
        let l1 = NormedSpace::l1(2);
        let di = arrow(&r, &l1, &[int(1), int(0)], &[int(1), int(0)]);
        let dj = arrow(&r, &l1, &[int(0), int(1)], &[frac(1, 2), int(1)]);
        let out = complemented_pushout(&di, &dj, Variant::Kubis).unwrap();
        assert!(out.certificate.all_hold(), "{:?}", out.certificate.failures().collect::<alloc::vec::Vec<_>>());
    }
}
