use alloc::format;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use super::{inclusion, pushout, Pushout};
use crate::arrows::{eps_commutativity, ArrowClass, DoubleArrow, Operator};
use crate::certificate::{Certificate, Relation};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::Q;
use crate::spaces::{direct_sum, NormedSpace, SumKind};

/// `E(f, X, Y)`: a space holding isometric copies `i_f(X)` and `j_f(Y)` with
/// `‖j_f f − i_f‖ ≤ ε`.
#[derive(Clone, Debug)]
pub struct CorrectionSpace {
    pub f: Operator,
    pub eps: Q,
    /// The push-out of `δ_ε: X → X ⊕₁ X` and `f`.
    pub pushout: Pushout,
    pub e: NormedSpace,
    /// Columns spanning `E` inside the push-out.
    pub basis: Matrix,
    pub i_f: Operator,
    pub j_f: Operator,
    pub certificate: Certificate,
}

/// Builds `E(f, X, Y)` for a contractive `(1+ε)`-isometry `f: X → Y`.
///
/// `X ⊕₁ X` carries `δ_ε(x) = (x, εx)`; with this norm `i_f` is an exact
/// isometry for every `ε ≥ 0` (the max-sum norm breaks the lower estimate).
/// For `ε = 0` the two copies span a space of dimension `dim Y`.
pub fn correction_space(f: &Operator, eps: &Q) -> Result<CorrectionSpace> {
    if *eps < Q::zero() {
        return Err(Error::Hypothesis("eps must be nonnegative".into()));
    }
    let (x, y) = (f.domain(), f.codomain());
    let (upper, lower) = f.isometry_constants()?;
    let one = Q::one();
    if upper > one || lower * (&one + eps) < one {
        return Err(Error::Hypothesis(format!("f is not a contractive (1 + {eps})-isometry")));
    }
    let n = x.dim();
    let xx = direct_sum(x, x, SumKind::L1)?;
    let delta = Operator::new(x.clone(), xx, Matrix::identity(n).vstack(&Matrix::identity(n).scale(eps)))?;
    let po = pushout(&delta, f)?;
    let total = 2 * n + y.dim();
    let q = po.quotient.matrix();
    let x_cols = q.mul(&inclusion(total, 0, n));
    let y_cols = q.mul(&inclusion(total, 2 * n, y.dim()));
    let both = x_cols.hstack(&y_cols);
    let keep = both.independent_cols();
    let basis = both.select_cols(&keep);
    let e = po.po.section(&basis.col_vectors(), format!("E({}, {})", x.label(), y.label()))?;
    let i_f = Operator::new(x.clone(), e.clone(), coordinates(&basis, &x_cols)?)?;
    let j_f = Operator::new(y.clone(), e.clone(), coordinates(&basis, &y_cols)?)?;

    let mut cert = Certificate::new();
    let (iu, il) = i_f.isometry_constants()?;
    let (ju, jl) = j_f.isometry_constants()?;
    cert.equals("i_f upper", iu, one.clone());
    cert.equals("i_f lower", il, one.clone());
    cert.equals("j_f upper", ju, one.clone());
    cert.equals("j_f lower", jl, one);
    cert.le("|j_f f - i_f|", j_f.after(f)?.distance(&i_f)?, eps.clone());
    Ok(CorrectionSpace { f: f.clone(), eps: eps.clone(), pushout: po, e, basis, i_f, j_f, certificate: cert })
}

/// Coordinates of each column of `m` in the independent columns of `basis`.
fn coordinates(basis: &Matrix, m: &Matrix) -> Result<Matrix> {
    let cols: Vec<Vec<Q>> = m
        .col_vectors()
        .iter()
        .map(|v| basis.coordinates(v).ok_or_else(|| Error::Invalid("vector outside the span".into())))
        .collect::<Result<_>>()?;
    Matrix::from_cols(&cols, basis.cols())
}

impl CorrectionSpace {
    /// The unique `γ: E → V` with `γi_f = k` and `γj_f = l`, given
    /// `‖lf − k‖ ≤ ε` (exact equality when `ε = 0`).
    pub fn factor(&self, k: &Operator, l: &Operator) -> Result<(Operator, Certificate)> {
        let defect = l.after(&self.f)?.sub(k)?;
        let gap = defect.norm().clone();
        if gap > self.eps {
            return Err(Error::Hypothesis(format!("|lf - k| = {gap} exceeds eps = {}", self.eps)));
        }
        let tail = if self.eps.is_zero() { defect.matrix().clone() } else { defect.matrix().scale(&self.eps.recip()) };
        let t = Operator::new(self.pushout.i.codomain().clone(), k.codomain().clone(), k.matrix().hstack(&tail))?;
        let (on_po, _) = self.pushout.factor(&t, l)?;
        let gamma = Operator::new(self.e.clone(), k.codomain().clone(), on_po.matrix().mul(&self.basis))?;
        let mut cert = Certificate::new();
        cert.le("|lf - k|", gap, self.eps.clone());
        cert.identity("gamma i_f = k", gamma.after(&self.i_f)?.matrix(), k.matrix());
        cert.identity("gamma j_f = l", gamma.after(&self.j_f)?.matrix(), l.matrix());
        Ok((gamma, cert))
    }
}

/// `E` with the double arrows `(i, ī): X ↔ E` and `(j, j̄): Y ↔ E` built
/// from a contractive `(1+ε, ε, 1)`-arrow.
#[derive(Clone, Debug)]
pub struct CorrectionDouble {
    pub space: CorrectionSpace,
    pub di: DoubleArrow,
    pub dj: DoubleArrow,
    pub commutativity: Q,
    pub certificate: Certificate,
}

/// Certifies `īj = f̄`, `j̄i = f`, `īi = 1`, `j̄j = 1`, `‖f̄‖ ≤ ‖ī‖`,
/// `‖f‖ ≤ ‖j̄‖` and the stated `‖f̄j̄ − ī‖ ≤ ε`. The last one cannot hold
/// once `β > ε²`, since `‖f̄j̄ − ī‖ ≥ β/ε`; both are recorded.
pub fn correction_double(d: &DoubleArrow, eps: &Q) -> Result<CorrectionDouble> {
    let cls = d.classify()?;
    let one = Q::one();
    let bound = ArrowClass::new(&one + eps, eps.clone(), one.clone(), true);
    if !cls.within(&bound) {
        return Err(Error::Hypothesis(format!("arrow class {cls:?} is not a contractive (1+eps, eps, 1) class")));
    }
    let (f, f_bar) = (&d.fwd, &d.back);
    let (x, y) = (d.source(), d.target());
    let space = correction_space(f, eps)?;
    let mut cert = Certificate::new();
    cert.absorb("space", space.certificate.clone());
    let (i_bar, c) = space.factor(&Operator::identity(x), f_bar)?;
    cert.absorb("factor (1_X, fbar)", c);
    let (j_bar, c) = space.factor(f, &Operator::identity(y))?;
    cert.absorb("factor (f, 1_Y)", c);
    let (i, j) = (&space.i_f, &space.j_f);
    cert.identity("ibar j = fbar", i_bar.after(j)?.matrix(), f_bar.matrix());
    cert.identity("jbar i = f", j_bar.after(i)?.matrix(), f.matrix());
    cert.identity("ibar i = 1", i_bar.after(i)?.matrix(), &Matrix::identity(x.dim()));
    cert.identity("jbar j = 1", j_bar.after(j)?.matrix(), &Matrix::identity(y.dim()));
    cert.le("|fbar| <= |ibar|", f_bar.norm().clone(), i_bar.norm().clone());
    cert.le("|f| <= |jbar|", f.norm().clone(), j_bar.norm().clone());
    let gap = f_bar.after(&j_bar)?.distance(&i_bar)?;
    cert.le("|fbar jbar - ibar|", gap.clone(), eps.clone());
    if eps.is_positive() {
        // (fbar jbar - ibar)(ix - jfx) = (fbar f - 1)x with |ix - jfx| <= eps|x|.
        cert.bound("|fbar jbar - ibar| >= beta/eps", gap, Relation::Ge, &cls.beta / eps);
    }
    let di = DoubleArrow::new(i.clone(), i_bar)?;
    let dj = DoubleArrow::new(j.clone(), j_bar)?;
    cert.flag("(i, ibar) is (1,0,1)", di.classify()?.is_double());
    cert.flag("(j, jbar) is (1,0,1)", dj.classify()?.is_double());
    let commutativity = eps_commutativity(&di, d, &dj)?;
    cert.le("eps-commutativity", commutativity.clone(), eps.clone());
    Ok(CorrectionDouble { space, di, dj, commutativity, certificate: cert })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn scalar(s: Q) -> Operator {
        let r = NormedSpace::real();
        Operator::new(r.clone(), r, Matrix::from_fn(1, 1, |_, _| s.clone())).unwrap()
    }

    #[test]
    fn isometry_with_zero_eps() {
        let r = NormedSpace::real();
        let cs = correction_space(&Operator::identity(&r), &int(0)).unwrap();
        assert!(cs.certificate.all_hold());
        assert_eq!(cs.e.dim(), 1);
        let (gamma, cert) = cs.factor(&cs.i_f, &cs.j_f).unwrap();
        assert!(cert.all_hold());
        assert!(gamma.matrix().is_identity());
    }

    #[test]
    fn shrinking_scalar() {
        for eps in [frac(1, 10), frac(1, 4), frac(1, 2)] {
            let f = scalar((Q::one() + &eps).recip());
            let cs = correction_space(&f, &eps).unwrap();
            assert_eq!(cs.e.dim(), 2);
            assert!(cs.certificate.all_hold(), "{:?}", cs.certificate.failures().collect::<Vec<_>>());
            let (gamma, cert) = cs.factor(&cs.i_f, &cs.j_f).unwrap();
            assert!(cert.all_hold());
            assert!(gamma.matrix().is_identity());
        }
    }

    #[test]
    fn max_sum_breaks_the_isometry() {
        // Q(1, 0, 0) in ((R +inf R) +1 R)/{(w, w/2, -2w/3)} has norm 7/9 < 1.
        let r = NormedSpace::real();
        let eps = frac(1, 2);
        let xx = direct_sum(&r, &r, SumKind::LInf).unwrap();
        let delta = Operator::new(r.clone(), xx, Matrix::from_fn(2, 1, |row, _| if row == 0 { int(1) } else { eps.clone() })).unwrap();
        let po = pushout(&delta, &scalar(frac(2, 3))).unwrap();
        let x_col = po.quotient.matrix().apply(&[int(1), int(0), int(0)]);
        assert_eq!(po.po.norm(&x_col), frac(7, 9));
    }

    #[test]
    fn double_version_of_a_shrinking_scalar() {
        let eps = frac(1, 10);
        let f = scalar((Q::one() + &eps).recip());
        let d = DoubleArrow::new(f, scalar(Q::one())).unwrap();
        let out = correction_double(&d, &eps).unwrap();
        let failing: Vec<&str> = out.certificate.failures().map(|c| c.label.as_str()).collect();
        assert_eq!(failing, ["|fbar jbar - ibar|", "eps-commutativity"]);
        assert!(out.certificate.get("|fbar jbar - ibar| >= beta/eps").unwrap().holds);
    }

    #[test]
    fn double_version_with_exact_projection() {
        let r = NormedSpace::real();
        let linf = NormedSpace::linf(2);
        let fwd = Matrix::from_fn(2, 1, |row, _| if row == 0 { int(1) } else { frac(1, 2) });
        let back = Matrix::from_fn(1, 2, |_, c| if c == 0 { int(1) } else { int(0) });
        let d = DoubleArrow::from_matrices(&r, &linf, fwd, back).unwrap();
        for eps in [int(0), frac(1, 4)] {
            let out = correction_double(&d, &eps).unwrap();
            assert!(out.certificate.all_hold(), "{:?}", out.certificate.failures().collect::<Vec<_>>());
        }
    }
}
