use alloc::format;

use num_traits::{One, Zero};

use super::Operator;
use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::Q;
use crate::spaces::NormedSpace;

/// An embedding `fwd: A → B` together with a map `back: B → A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleArrow {
    pub fwd: Operator,
    pub back: Operator,
}

/// Exact constants of an arrow: `fwd` is an `alpha`-isometry,
/// `‖back∘fwd − 1‖ = beta` and `‖back‖ = gamma`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ArrowClass {
    pub alpha: Q,
    pub beta: Q,
    pub gamma: Q,
    pub contractive: bool,
}

impl ArrowClass {
    pub fn new(alpha: Q, beta: Q, gamma: Q, contractive: bool) -> Self {
        ArrowClass { alpha, beta, gamma, contractive }
    }

    pub fn double() -> Self {
        ArrowClass::new(Q::one(), Q::zero(), Q::one(), true)
    }

    /// `(1, 0, 1)`: an isometric embedding with a norm-one projection.
    pub fn is_double(&self) -> bool {
        self.alpha.is_one() && self.beta.is_zero() && self.gamma.is_one()
    }

    /// Componentwise `self ≤ (alpha, beta, gamma)`, plus contractivity when
    /// the bound asks for it.
    pub fn within(&self, bound: &ArrowClass) -> bool {
        self.alpha <= bound.alpha
            && self.beta <= bound.beta
            && self.gamma <= bound.gamma
            && (!bound.contractive || self.contractive)
    }

    /// Appends one bound check per component.
    pub fn certify_within(&self, cert: &mut Certificate, label: &str, bound: &ArrowClass) -> bool {
        let a = cert.le(format!("{label}.alpha"), self.alpha.clone(), bound.alpha.clone());
        let b = cert.le(format!("{label}.beta"), self.beta.clone(), bound.beta.clone());
        let g = cert.le(format!("{label}.gamma"), self.gamma.clone(), bound.gamma.clone());
        let c = !bound.contractive || cert.flag(format!("{label}.contractive"), self.contractive);
        a && b && g && c
    }
}

impl DoubleArrow {
    pub fn new(fwd: Operator, back: Operator) -> Result<Self> {
        if fwd.domain() != back.codomain() || fwd.codomain() != back.domain() {
            return Err(Error::SpaceMismatch("double arrow legs"));
        }
        Ok(DoubleArrow { fwd, back })
    }

    pub fn from_matrices(a: &NormedSpace, b: &NormedSpace, fwd: Matrix, back: Matrix) -> Result<Self> {
        DoubleArrow::new(Operator::new(a.clone(), b.clone(), fwd)?, Operator::new(b.clone(), a.clone(), back)?)
    }

    pub fn identity(space: &NormedSpace) -> Self {
        DoubleArrow { fwd: Operator::identity(space), back: Operator::identity(space) }
    }

    pub fn source(&self) -> &NormedSpace {
        self.fwd.domain()
    }

    pub fn target(&self) -> &NormedSpace {
        self.fwd.codomain()
    }

    /// `back∘fwd − 1_A`.
    pub fn defect(&self) -> Operator {
        self.back.after(&self.fwd).expect("legs match").sub(&Operator::identity(self.source())).expect("square")
    }

    pub fn classify(&self) -> Result<ArrowClass> {
        let alpha = self.fwd.isometry_alpha()?;
        let beta = self.defect().norm().clone();
        let gamma = self.back.norm().clone();
        let contractive = *self.fwd.norm() <= Q::one();
        Ok(ArrowClass { alpha, beta, gamma, contractive })
    }

    /// Whether `back∘fwd = 1` exactly.
    pub fn is_exact_projection(&self) -> bool {
        self.back.matrix().mul(self.fwd.matrix()).is_identity()
    }

    /// Both legs scaled: `(s·fwd, t·back)`.
    pub fn scaled(&self, s: &Q, t: &Q) -> DoubleArrow {
        DoubleArrow { fwd: self.fwd.scale(s), back: self.back.scale(t) }
    }
}

/// `(fwd₃∘fwd₂, back₂∘back₃): A ↔ C` for `d2: A ↔ B`, `d3: B ↔ C`.
pub fn compose(d2: &DoubleArrow, d3: &DoubleArrow) -> Result<DoubleArrow> {
    DoubleArrow::new(d3.fwd.after(&d2.fwd)?, d2.back.after(&d3.back)?)
}

/// Composition together with the exact check `alpha ≤ alpha₂·alpha₃`.
pub fn compose_certified(d2: &DoubleArrow, d3: &DoubleArrow) -> Result<(DoubleArrow, Certificate)> {
    let out = compose(d2, d3)?;
    let (c2, c3, c) = (d2.classify()?, d3.classify()?, out.classify()?);
    let mut cert = Certificate::new();
    cert.le("alpha", c.alpha.clone(), &c2.alpha * &c3.alpha);
    if c2.contractive && c3.contractive {
        cert.flag("contractive", c.contractive);
    }
    Ok((out, cert))
}

/// `(fwd/α, back/γ)`, certified against the contractive
/// `(α², (β + γα − 1)/(γα), 1)` class.
pub fn scale_to_contractive(d: &DoubleArrow, cls: &ArrowClass) -> Result<(DoubleArrow, Certificate)> {
    let actual = d.classify()?;
    if actual.alpha != cls.alpha || actual.beta != cls.beta || actual.gamma != cls.gamma {
        return Err(Error::CertificateMismatch("declared class differs from the recomputed one".into()));
    }
    if cls.gamma < Q::one() {
        return Err(Error::GammaBelowOne);
    }
    let out = d.scaled(&cls.alpha.recip(), &cls.gamma.recip());
    let ga = &cls.gamma * &cls.alpha;
    let bound = ArrowClass::new(&cls.alpha * &cls.alpha, (&cls.beta + &ga - Q::one()) / &ga, Q::one(), true);
    let mut cert = Certificate::new();
    out.classify()?.certify_within(&mut cert, "scaled", &bound);
    Ok((out, cert))
}

/// `(f, (f̄f)⁻¹f̄)`: an exact projection along `f` built from an almost one.
///
/// The bounds `γ′ ≤ γ/(1−ε)` and `‖f̄ − (f̄f)⁻¹f̄‖ ≤ γε/(1−ε)` are certified
/// for every input; when `γ ≤ 1` they are the sharper `1 + ε/(1−ε)` and
/// `ε/(1−ε)`.
pub fn exactify_projection(d: &DoubleArrow, eps: &Q) -> Result<(DoubleArrow, Certificate)> {
    let cls = d.classify()?;
    if !(cls.beta <= *eps && *eps < Q::one()) {
        return Err(Error::Hypothesis(format!("need beta <= eps < 1, beta = {}", cls.beta)));
    }
    let m = d.back.matrix().mul(d.fwd.matrix());
    let inv = m.inverse().map_err(|_| Error::Singular)?;
    let back = Operator::new(d.target().clone(), d.source().clone(), inv.mul(d.back.matrix()))?;
    let out = DoubleArrow::new(d.fwd.clone(), back)?;
    let mut cert = Certificate::new();
    cert.identity("back*fwd = 1", &out.back.matrix().mul(out.fwd.matrix()), &Matrix::identity(d.source().dim()));
    let slack = Q::one() - eps;
    let gamma = out.back.norm().clone();
    let distance = d.back.distance(&out.back)?;
    cert.le("gamma'", gamma.clone(), &cls.gamma / &slack);
    cert.le("distance", distance.clone(), &cls.gamma * eps / &slack);
    if cls.gamma <= Q::one() {
        cert.le("gamma' (contractive form)", gamma, Q::one() + eps / &slack);
        cert.le("distance (contractive form)", distance, eps / &slack);
    }
    Ok((out, cert))
}

/// `max(‖i₃i₂ − i₁‖, ‖ī₂ī₃ − ī₁‖)` for `d1: A ↔ C`, `d2: A ↔ B`, `d3: B ↔ C`.
pub fn eps_commutativity(d1: &DoubleArrow, d2: &DoubleArrow, d3: &DoubleArrow) -> Result<Q> {
    let fwd = d3.fwd.after(&d2.fwd)?.distance(&d1.fwd)?;
    let back = d2.back.after(&d3.back)?.distance(&d1.back)?;
    Ok(fwd.max(back))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn coordinate_arrow_into(target: &NormedSpace, back_second: Q) -> DoubleArrow {
        let fwd = Matrix::from_fn(2, 1, |row, _| if row == 0 { int(1) } else { int(0) });
        let back = Matrix::from_fn(1, 2, |_, c| if c == 0 { int(1) } else { back_second.clone() });
        DoubleArrow::from_matrices(&NormedSpace::real(), target, fwd, back).unwrap()
    }

    fn coordinate_arrow(back_second: Q) -> DoubleArrow {
        coordinate_arrow_into(&NormedSpace::l1(2), back_second)
    }

    #[test]
    fn classify_examples() {
        assert!(DoubleArrow::identity(&NormedSpace::l1(3)).classify().unwrap().is_double());
        assert!(coordinate_arrow(int(0)).classify().unwrap().is_double());
        // (1, 1/2) has dual norm 1 on the l1 plane and 3/2 on the max plane.
        let c = coordinate_arrow(frac(1, 2)).classify().unwrap();
        assert_eq!((c.beta, c.gamma), (int(0), int(1)));
        let c = coordinate_arrow_into(&NormedSpace::linf(2), frac(1, 2)).classify().unwrap();
        assert_eq!((c.beta, c.gamma), (int(0), frac(3, 2)));
    }

    #[test]
    fn exactify_one_dimensional() {
        let r = NormedSpace::real();
        let l1 = NormedSpace::l1(2);
        let fwd = Matrix::from_fn(2, 1, |row, _| if row == 0 { int(1) } else { int(0) });
        let back = Matrix::from_fn(1, 2, |_, c| if c == 0 { frac(9, 10) } else { int(0) });
        let d = DoubleArrow::from_matrices(&r, &l1, fwd, back).unwrap();
        let (e, cert) = exactify_projection(&d, &frac(1, 10)).unwrap();
        assert!(cert.all_hold());
        assert_eq!(e, coordinate_arrow(int(0)));
    }

    #[test]
    fn scaling_a_double_arrow_is_identity() {
        let d = coordinate_arrow(int(0));
        let (e, cert) = scale_to_contractive(&d, &d.classify().unwrap()).unwrap();
        assert!(cert.all_hold());
        assert_eq!(e, d);
    }

    #[test]
    fn gamma_below_one_rejected() {
        let d = coordinate_arrow(int(0)).scaled(&int(1), &frac(1, 2));
        let cls = d.classify().unwrap();
        assert_eq!(scale_to_contractive(&d, &cls).unwrap_err(), Error::GammaBelowOne);
    }
}
