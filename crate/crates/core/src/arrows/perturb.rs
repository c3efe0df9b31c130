use alloc::format;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use super::Operator;
use crate::certificate::{Certificate, Relation};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::{self, Q, Vector};
use crate::spaces::{framing_delta, NormedSpace};

/// Outcome of moving a complemented subspace `A ⊂ E` to a nearby `X ⊂ E`.
#[derive(Clone, Debug)]
pub struct Perturbation {
    /// `A` in the coordinates of the given basis `aᵢ`.
    pub a_space: NormedSpace,
    /// `X = span{xᵢ}` in the coordinates of `xᵢ`.
    pub x_space: NormedSpace,
    /// `τ: A → X`, `aᵢ ↦ xᵢ`; the identity matrix in these coordinates.
    pub tau: Operator,
    /// `τp: E → E`.
    pub tau_p: Operator,
    /// `p′ = ((τp)|X)⁻¹τp: E → E`, a projection onto `X`.
    pub p_prime: Operator,
    /// `p′` with codomain `X` in its own coordinates.
    pub p_prime_onto: Operator,
    pub delta: Q,
    pub c: Q,
    pub certificate: Certificate,
}

/// Builds `τ` and `p′` for `E`, a basis `aᵢ` of `A`, a projection
/// `p: E → A` (codomain in `aᵢ` coordinates) and nearby vectors `xᵢ`.
///
/// Requires `0 < ε < 1/3` and `‖xᵢ − aᵢ‖ ≤ ε/(δC)`, where `δ` is the framing
/// constant of the `aᵢ` in `A` and `C = ‖p‖`. The certificate records the
/// stated bounds and, separately, the weaker bounds that the estimates
/// `‖τ⁻¹‖ ≤ 1/(1 − ε/C)` and `‖(1 − τp)|X‖ ≤ ε(1+ε)/(1−ε)` yield.
pub fn perturb_projection(e: &NormedSpace, a_basis: &[Vector], p: &Operator, x: &[Vector], eps: &Q) -> Result<Perturbation> {
    let n = a_basis.len();
    let third = rational::frac(1, 3);
    if !(eps.is_positive() && *eps < third) {
        return Err(Error::Hypothesis(format!("need 0 < eps < 1/3, got {eps}")));
    }
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    let a_space = e.section(a_basis, "A")?;
    if p.domain() != e || p.codomain().dim() != n {
        return Err(Error::SpaceMismatch("projection must map E onto A coordinates"));
    }
    let p = p.retarget(e, &a_space)?;
    let a_mat = Matrix::from_cols(a_basis, e.dim())?;
    if !p.matrix().mul(&a_mat).is_identity() {
        return Err(Error::Hypothesis("p does not fix A".into()));
    }
    let units: Vec<Vector> = (0..n).map(|i| rational::unit(n, i)).collect();
    let delta = framing_delta(&a_space, &units)?;
    let c = p.norm().clone();
    let radius = eps / (&delta * &c);
    let offset = a_basis.iter().zip(x).map(|(a, xi)| e.norm(&rational::sub(xi, a))).max().unwrap_or_else(Q::zero);
    if offset > radius {
        return Err(Error::Hypothesis(format!("max |x_i - a_i| = {offset} exceeds eps/(delta C) = {radius}")));
    }
    let x_space = e.section(x, "X")?;
    let x_mat = Matrix::from_cols(x, e.dim())?;
    let tau = Operator::new(a_space.clone(), x_space.clone(), Matrix::identity(n))?;
    let tau_p = Operator::new(e.clone(), e.clone(), x_mat.mul(p.matrix()))?;
    let restricted = p.matrix().mul(&x_mat);
    let inv = restricted.inverse().map_err(|_| Error::Singular)?;
    let onto = inv.mul(p.matrix());
    let p_prime_onto = Operator::new(e.clone(), x_space.clone(), onto.clone())?;
    let p_prime = Operator::new(e.clone(), e.clone(), x_mat.mul(&onto))?;

    let one = Q::one();
    let mut cert = Certificate::new();
    cert.info("delta", delta.clone());
    cert.info("C", c.clone());
    cert.le("hypothesis max |x_i - a_i|", offset, radius);
    let (upper, lower) = tau.isometry_constants()?;
    cert.le("tau upper", upper.clone(), &one + eps);
    cert.bound("tau lower", lower.clone(), Relation::Ge, (&one + eps).recip());
    cert.bound("tau lower (proof)", lower, Relation::Ge, &one - eps / &c);
    cert.identity("p'^2 = p'", &p_prime.matrix().mul(p_prime.matrix()), p_prime.matrix());
    cert.identity("p' fixes X", &p_prime.matrix().mul(&x_mat), &x_mat);
    let mu = restricted_defect(e, &x_space, &x_mat, &tau_p);
    cert.le("|(1 - tau p)|X|", mu, eps * (&one + eps) / (&one - eps));
    let e2 = eps * eps;
    let norm = p_prime.norm().clone();
    let dist = p_prime.distance(&tau_p)?;
    let proof_den = &one - eps * rational::int(2) - &e2;
    cert.le("|p'|", norm.clone(), &c * (&one - &e2) / (&one - eps * rational::int(3)));
    cert.le("|p'| (proof)", norm, &c * (&one - &e2) / &proof_den);
    let grow = (&one + eps) * (&one + eps);
    cert.le("|p' - tau p|", dist.clone(), eps * &grow * &c / (&one - eps));
    cert.le("|p' - tau p| (proof)", dist, eps * &grow * &c / &proof_den);
    let scaled = p_prime.scale(&(&one + eps)).distance(&tau_p.scale(&(&one + eps).recip()))?;
    cert.le("|(1+eps)p' - tau p/(1+eps)|", scaled, rational::int(3) * eps * &c);
    Ok(Perturbation { a_space, x_space, tau, tau_p, p_prime, p_prime_onto, delta, c, certificate: cert })
}

/// `‖(1 − τp)|X‖` with `X` normed as a subspace of `E`.
fn restricted_defect(e: &NormedSpace, x_space: &NormedSpace, x_mat: &Matrix, tau_p: &Operator) -> Q {
    let defect = Matrix::identity(e.dim()).sub(tau_p.matrix()).mul(x_mat);
    x_space.vertices().iter().map(|v| e.norm(&defect.apply(v))).max().unwrap_or_else(Q::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};
    use alloc::vec;

    fn setup() -> (NormedSpace, Vec<Vector>, Operator) {
        let e = NormedSpace::l1(2);
        let a = vec![vec![int(1), int(0)]];
        let p = Operator::new(e.clone(), NormedSpace::real(), Matrix::from_fn(1, 2, |_, c| int(1 - c as i64))).unwrap();
        (e, a, p)
    }

    #[test]
    fn identity_perturbation() {
        let (e, a, p) = setup();
        let out = perturb_projection(&e, &a, &p, &a, &frac(1, 10)).unwrap();
        assert!(out.certificate.all_hold(), "{:?}", out.certificate.failures().collect::<Vec<_>>());
        assert!(out.p_prime.distance(&out.tau_p).unwrap().is_zero());
    }

    #[test]
    fn tilted_line_in_l1_plane() {
        let (e, a, p) = setup();
        let eps = frac(1, 10);
        let x = vec![vec![int(1), frac(1, 20)]];
        let out = perturb_projection(&e, &a, &p, &x, &eps).unwrap();
        assert!(out.certificate.get("p'^2 = p'").unwrap().holds);
        assert!(out.certificate.get("|p'|").unwrap().holds);
    }

    #[test]
    fn offset_too_large_is_rejected() {
        let (e, a, p) = setup();
        let x = vec![vec![int(1), frac(1, 2)]];
        assert!(matches!(perturb_projection(&e, &a, &p, &x, &frac(1, 10)), Err(Error::Hypothesis(_))));
    }
}
