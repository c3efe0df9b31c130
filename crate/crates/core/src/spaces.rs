//! Finite-dimensional normed spaces whose unit ball is a symmetric rational
//! polytope.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::geometry::Polytope;
use crate::matrix::Matrix;
use crate::rational::{self, Q, Vector};

struct Inner {
    ball: Polytope,
    label: String,
}

/// A normed space `(ℝⁿ, ‖·‖)` with polytopal unit ball. Cloning is cheap.
#[derive(Clone)]
pub struct NormedSpace(Arc<Inner>);

impl PartialEq for NormedSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.ball == other.0.ball
    }
}

impl Eq for NormedSpace {}

impl fmt::Debug for NormedSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[dim {}, {} vertices]", self.0.label, self.dim(), self.0.ball.vertices().len())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SumKind {
    L1,
    LInf,
}

/// The canonical quotient map onto the pivot complement of a kernel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientMap {
    /// `(n − k) × n` matrix of `q`.
    pub matrix: Matrix,
    /// `n × (n − k)` right inverse of `q` that is zero on the pivot coordinates.
    pub lift: Matrix,
    /// Coordinates dropped by the quotient.
    pub pivots: Vec<usize>,
}

fn sign_vectors(n: usize) -> Vec<Vector> {
    (0..1usize << n)
        .map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { -Q::one() } else { Q::one() }).collect())
        .collect()
}

fn signed_units(n: usize) -> Vec<Vector> {
    (0..n).flat_map(|i| [rational::unit(n, i), rational::neg(&rational::unit(n, i))]).collect()
}

impl NormedSpace {
    /// Wraps a ball, checking symmetry, full dimension and interior origin.
    pub fn new(ball: Polytope, label: impl Into<String>) -> Result<Self> {
        if !ball.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        ball.facets()?;
        Ok(NormedSpace(Arc::new(Inner { ball, label: label.into() })))
    }

    /// Space whose ball is the hull of the given points.
    pub fn from_points(points: &[Vector], label: impl Into<String>) -> Result<Self> {
        NormedSpace::new(Polytope::hull(points)?, label)
    }

    pub fn l1(n: usize) -> Self {
        if n == 0 {
            return NormedSpace::linf(0).relabel("l1^0");
        }
        let ball = Polytope::from_parts(n, signed_units(n), sign_vectors(n)).expect("coordinate ball");
        NormedSpace(Arc::new(Inner { ball, label: format!("l1^{n}") }))
    }

    pub fn linf(n: usize) -> Self {
        let ball = Polytope::from_parts(n, sign_vectors(n), signed_units(n)).expect("coordinate ball");
        NormedSpace(Arc::new(Inner { ball, label: format!("linf^{n}") }))
    }

    /// The scalar field with its absolute value.
    pub fn real() -> Self {
        NormedSpace::l1(1).relabel("R")
    }

    /// The zero space.
    pub fn zero() -> Self {
        NormedSpace::linf(0).relabel("0")
    }

    pub fn relabel(&self, label: impl Into<String>) -> Self {
        NormedSpace(Arc::new(Inner { ball: self.0.ball.clone(), label: label.into() }))
    }

    pub fn dim(&self) -> usize {
        self.0.ball.dim()
    }

    pub fn ball(&self) -> &Polytope {
        &self.0.ball
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    pub fn vertices(&self) -> &[Vector] {
        self.0.ball.vertices()
    }

    pub fn facets(&self) -> &[Vector] {
        self.0.ball.facets().expect("validated at construction")
    }

    pub fn try_norm(&self, x: &[Q]) -> Result<Q> {
        self.0.ball.gauge(x)
    }

    /// `max_φ ⟨φ, x⟩`. Panics on a length mismatch.
    pub fn norm(&self, x: &[Q]) -> Q {
        self.try_norm(x).expect("vector length matches the space")
    }

    /// The dual space; its ball is the polar body.
    pub fn dual(&self) -> Self {
        let ball = self.0.ball.polar().expect("validated at construction");
        NormedSpace(Arc::new(Inner { ball, label: format!("({})*", self.label()) }))
    }

    /// The subspace `span(basis)` with the restricted norm, in basis coordinates.
    pub fn section(&self, basis: &[Vector], label: impl Into<String>) -> Result<Self> {
        NormedSpace::new(self.0.ball.section(basis)?, label)
    }

    /// `X/span(kernel)` on the pivot complement.
    pub fn quotient(&self, kernel: &[Vector]) -> Result<(NormedSpace, QuotientMap)> {
        let n = self.dim();
        if let Some(bad) = kernel.iter().find(|k| k.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
        }
        let k = Matrix::from_rows(kernel, n)?;
        let (reduced, pivots) = k.rref();
        if pivots.len() < kernel.len() {
            return Err(Error::DependentBasis);
        }
        if !kernel.is_empty() && pivots.len() >= n {
            return Err(Error::KernelNotProper);
        }
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        let matrix = Matrix::from_fn(free.len(), n, |r, c| {
            let fc = free[r];
            if c == fc {
                Q::one()
            } else if let Some(j) = pivots.iter().position(|&p| p == c) {
                -reduced[(j, fc)].clone()
            } else {
                Q::zero()
            }
        });
        let lift = Matrix::from_fn(n, free.len(), |r, c| if free[c] == r { Q::one() } else { Q::zero() });
        let ball = self.0.ball.linear_image(&matrix)?;
        let space = NormedSpace::new(ball, format!("{}/ker", self.label()))?;
        Ok((space, QuotientMap { matrix, lift, pivots }))
    }
}

/// `A ⊕₁ B` or `A ⊕∞ B`, with `A` in the leading coordinates.
pub fn direct_sum(a: &NormedSpace, b: &NormedSpace, kind: SumKind) -> Result<NormedSpace> {
    let (n, m) = (a.dim(), b.dim());
    if n == 0 || m == 0 {
        return Ok(if n == 0 { b.clone() } else { a.clone() });
    }
    // ⊕₁ has the spread vertices and product facets; ⊕∞ the reverse.
    let (left, right, pa, pb) = match kind {
        SumKind::L1 => (a.vertices(), b.vertices(), a.facets(), b.facets()),
        SumKind::LInf => (a.facets(), b.facets(), a.vertices(), b.vertices()),
    };
    let mut spread: Vec<Vector> = Vec::with_capacity(left.len() + right.len());
    for v in left {
        let mut out = v.clone();
        out.extend(rational::zeros(m));
        spread.push(out);
    }
    for w in right {
        let mut out = rational::zeros(n);
        out.extend(w.iter().cloned());
        spread.push(out);
    }
    let mut product = Vec::with_capacity(pa.len() * pb.len());
    for v in pa {
        for w in pb {
            let mut out = v.clone();
            out.extend(w.iter().cloned());
            product.push(out);
        }
    }
    let (vertices, facets, op) = match kind {
        SumKind::L1 => (spread, product, "+1"),
        SumKind::LInf => (product, spread, "+inf"),
    };
    let ball = Polytope::from_parts(n + m, vertices, facets)?;
    Ok(NormedSpace(Arc::new(Inner { ball, label: format!("({} {op} {})", a.label(), b.label()) })))
}

/// `‖T‖` for `T: domain → codomain`, the maximum over domain vertices.
pub fn operator_norm(domain: &NormedSpace, codomain: &NormedSpace, t: &Matrix) -> Q {
    domain.vertices().iter().map(|v| codomain.norm(&t.apply(v))).max().unwrap_or_else(Q::zero)
}

/// `δ` with `δ⁻¹Σ|λᵢ| ≤ ‖Σλᵢaᵢ‖ ≤ Σ|λᵢ|`, i.e. `‖T⁻¹: A → ℓ₁ⁿ‖` for
/// `T eᵢ = aᵢ`. Requires `‖aᵢ‖ ≤ 1` and a basis.
pub fn framing_delta(space: &NormedSpace, basis: &[Vector]) -> Result<Q> {
    let n = space.dim();
    if basis.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: basis.len() });
    }
    if basis.iter().any(|a| space.norm(a) > Q::one()) {
        return Err(Error::Hypothesis("framing vectors must lie in the unit ball".into()));
    }
    let t = Matrix::from_cols(basis, n)?;
    let inv = t.inverse().map_err(|_| Error::DependentBasis)?;
    Ok(space.vertices().iter().map(|v| rational::l1_norm(&inv.apply(v))).max().unwrap_or_else(Q::one))
}

/// Unit vectors used as framing candidates: one of each `±v` vertex pair,
/// then normalized sums of pairs of them, up to `max_sums` extra vectors.
fn framing_candidates(space: &NormedSpace, max_sums: usize) -> Vec<Vector> {
    let reps: Vec<Vector> = space.vertices().iter().filter(|v| **v > rational::neg(v)).cloned().collect();
    let mut out = reps.clone();
    'outer: for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            if out.len() >= reps.len() + max_sums {
                break 'outer;
            }
            for s in [rational::add(&reps[i], &reps[j]), rational::sub(&reps[i], &reps[j])] {
                let norm = space.norm(&s);
                if !norm.is_zero() {
                    let unit = rational::scale(&s, &norm.recip());
                    if !out.contains(&unit) && !out.contains(&rational::neg(&unit)) {
                        out.push(unit);
                    }
                }
            }
        }
    }
    out
}

/// Calls `visit` on every `k`-subset of `0..n` in lexicographic order until it
/// returns `false`.
pub(crate) fn for_each_combination(n: usize, k: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !visit(&idx) {
            return;
        }
        let Some(pos) = (0..k).rev().find(|&p| idx[p] < n - k + p) else {
            return;
        };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// A unit basis minimizing `framing_delta` among candidate subsets, searched
/// in lexicographic order of candidate indices within `budget` evaluations.
pub fn l1_framing(space: &NormedSpace, max_sums: usize, budget: usize) -> (Vec<Vector>, Q) {
    let n = space.dim();
    let candidates = framing_candidates(space, max_sums);
    let mut best: Option<(Q, Vec<Vector>)> = None;
    let mut spent = 0;
    for_each_combination(candidates.len(), n, |idx| {
        let basis: Vec<Vector> = idx.iter().map(|&i| candidates[i].clone()).collect();
        if let Ok(delta) = framing_delta(space, &basis) {
            spent += 1;
            if best.as_ref().is_none_or(|(d, _)| delta < *d) {
                best = Some((delta, basis));
            }
        }
        spent < budget && best.as_ref().is_none_or(|(d, _)| !d.is_one())
    });
    let (delta, basis) = best.expect("ball vertices span the space");
    (basis, delta)
}

/// A lexicographically first basis of `space` made of ball vertices.
pub fn vertex_basis(space: &NormedSpace) -> Vec<Vector> {
    let mut basis: Vec<Vector> = Vec::new();
    for v in space.vertices().iter().rev() {
        let mut trial = basis.clone();
        trial.push(v.clone());
        if Matrix::from_rows(&trial, space.dim()).map(|m| m.rank() == trial.len()).unwrap_or(false) {
            basis = trial;
        }
        if basis.len() == space.dim() {
            break;
        }
    }
    basis
}

/// Invertible maps `F → G` sending `vertex_basis(F)` to ordered tuples of
/// distinct vertices of `G`, in lexicographic tuple order, at most `limit`.
pub fn vertex_matchings(f: &NormedSpace, g: &NormedSpace, limit: usize) -> Vec<Matrix> {
    let n = f.dim();
    if n != g.dim() || n == 0 {
        return if n == g.dim() { vec![Matrix::identity(0)] } else { Vec::new() };
    }
    let src = Matrix::from_cols(&vertex_basis(f), n).expect("basis shape");
    let src_inv = src.inverse().expect("vertex basis");
    let targets = g.vertices();
    let mut out = Vec::new();
    let mut tuple: Vec<usize> = vec![0; n];
    matching_tuples(targets, &mut tuple, 0, &mut |t| {
        let cols: Vec<Vector> = t.iter().map(|&i| targets[i].clone()).collect();
        let m = Matrix::from_cols(&cols, n).expect("tuple shape");
        if m.rank() == n {
            out.push(m.mul(&src_inv));
        }
        out.len() < limit
    });
    out
}

fn matching_tuples(
    targets: &[Vector],
    tuple: &mut Vec<usize>,
    depth: usize,
    visit: &mut impl FnMut(&[usize]) -> bool,
) -> bool {
    if depth == tuple.len() {
        return visit(tuple);
    }
    for i in 0..targets.len() {
        let clash = tuple[..depth].iter().any(|&j| j == i || targets[j] == rational::neg(&targets[i]));
        if clash {
            continue;
        }
        tuple[depth] = i;
        if !matching_tuples(targets, tuple, depth + 1, visit) {
            return false;
        }
    }
    true
}

/// `‖T‖·‖T⁻¹‖` for an invertible `T: a → b`.
pub fn distortion(a: &NormedSpace, b: &NormedSpace, t: &Matrix) -> Option<Q> {
    let inv = t.inverse().ok()?;
    Some(operator_norm(a, b, t) * operator_norm(b, a, &inv))
}

/// An upper bound on the Banach–Mazur distance found by searching the
/// identity, vertex matchings and coordinate-wise rational perturbations of
/// the best candidate, within `budget` evaluations.
pub fn bm_upper(a: &NormedSpace, b: &NormedSpace, budget: usize) -> Result<(Q, Matrix)> {
    let n = a.dim();
    if n != b.dim() {
        return Err(Error::DimensionMismatch { expected: n, found: b.dim() });
    }
    let identity = Matrix::identity(n);
    let mut best = (distortion(a, b, &identity).expect("identity"), identity);
    let mut spent = 1;
    for t in vertex_matchings(a, b, budget.saturating_sub(1)) {
        if best.0.is_one() {
            return Ok(best);
        }
        spent += 1;
        if let Some(d) = distortion(a, b, &t) {
            if d < best.0 {
                best = (d, t);
            }
        }
    }
    let steps = [rational::frac(1, 4), rational::frac(1, 8), rational::frac(1, 16)];
    let mut improved = true;
    while improved && spent < budget && !best.0.is_one() {
        improved = false;
        'search: for h in &steps {
            for r in 0..n {
                for c in 0..n {
                    for sign in [Q::one(), -Q::one()] {
                        if spent >= budget {
                            break 'search;
                        }
                        spent += 1;
                        let mut t = best.1.clone();
                        t[(r, c)] += h * &sign;
                        if let Some(d) = distortion(a, b, &t) {
                            if d < best.0 {
                                best = (d, t);
                                improved = true;
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn v(xs: &[i64]) -> Vector {
        xs.iter().map(|&x| int(x)).collect()
    }

    fn hexagon() -> NormedSpace {
        NormedSpace::from_points(&[v(&[1, 0]), v(&[0, 1]), v(&[1, 1]), v(&[-1, 0]), v(&[0, -1]), v(&[-1, -1])], "hex")
            .unwrap()
    }

    #[test]
    fn norms_of_named_spaces() {
        assert_eq!(NormedSpace::linf(2).norm(&v(&[1, 1])), int(1));
        assert_eq!(NormedSpace::l1(2).norm(&v(&[1, 1])), int(2));
        assert_eq!(hexagon().norm(&v(&[1, 1])), int(1));
        assert_eq!(hexagon().norm(&v(&[1, -1])), int(2));
    }

    #[test]
    fn duals_of_coordinate_spaces() {
        assert_eq!(NormedSpace::l1(2).dual(), NormedSpace::linf(2));
        assert_eq!(NormedSpace::linf(3).dual(), NormedSpace::l1(3));
        let h = hexagon();
        assert_eq!(h.dual().dual(), h);
        assert_eq!(h.dual().vertices(), h.facets());
    }

    #[test]
    fn sums() {
        let r = NormedSpace::real();
        assert_eq!(direct_sum(&r, &r, SumKind::L1).unwrap(), NormedSpace::l1(2));
        assert_eq!(direct_sum(&r, &r, SumKind::LInf).unwrap(), NormedSpace::linf(2));
        assert_eq!(direct_sum(&NormedSpace::l1(2), &r, SumKind::L1).unwrap(), NormedSpace::l1(3));
    }

    #[test]
    fn quotients() {
        let (q, map) = NormedSpace::l1(2).quotient(&[v(&[1, -1])]).unwrap();
        assert_eq!(q.dim(), 1);
        assert_eq!(q.norm(&map.matrix.apply(&v(&[1, 0]))), int(1));
        let (q, map) = NormedSpace::linf(2).quotient(&[v(&[1, -1])]).unwrap();
        assert_eq!(q.norm(&map.matrix.apply(&v(&[1, 0]))), frac(1, 2));
        let (q, map) = NormedSpace::linf(2).quotient(&[v(&[0, 1])]).unwrap();
        assert_eq!(q.norm(&map.matrix.apply(&v(&[1, 0]))), int(1));
        let (q, map) = NormedSpace::l1(2).quotient(&[]).unwrap();
        assert_eq!(q, NormedSpace::l1(2));
        assert!(map.matrix.is_identity());
        assert_eq!(NormedSpace::l1(1).quotient(&[v(&[1])]).unwrap_err(), Error::KernelNotProper);
    }

    #[test]
    fn framing_constants() {
        assert_eq!(framing_delta(&NormedSpace::l1(3), &[rational::unit(3, 0), rational::unit(3, 1), rational::unit(3, 2)]), Ok(int(1)));
        assert_eq!(framing_delta(&NormedSpace::linf(2), &[v(&[1, 0]), v(&[0, 1])]), Ok(int(2)));
        assert_eq!(l1_framing(&NormedSpace::real(), 8, 100).1, int(1));
        assert_eq!(l1_framing(&NormedSpace::l1(3), 8, 100).1, int(1));
    }

    #[test]
    fn banach_mazur_bounds() {
        let (d, _) = bm_upper(&hexagon(), &hexagon(), 10).unwrap();
        assert_eq!(d, int(1));
        let (d, t) = bm_upper(&NormedSpace::l1(2), &NormedSpace::linf(2), 100).unwrap();
        assert_eq!(d, int(1));
        assert_eq!(distortion(&NormedSpace::l1(2), &NormedSpace::linf(2), &t), Some(int(1)));
        let (d, _) = bm_upper(&NormedSpace::l1(3), &NormedSpace::linf(3), 400).unwrap();
        assert!(d >= int(1) && d <= int(3));
    }

    #[test]
    fn combinations_in_order() {
        let mut seen = Vec::new();
        for_each_combination(4, 2, |c| {
            seen.push(c.to_vec());
            true
        });
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], [0, 1]);
        assert_eq!(seen[5], [2, 3]);
    }
}
