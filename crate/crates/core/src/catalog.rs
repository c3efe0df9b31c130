//! Finite catalogs of double arrows, arrow grids, catalog matching and
//! norming pairs.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arrows::{arrow_distance_upper, ArrowClass, DoubleArrow, Operator};
use crate::error::Result;
use crate::matrix::Matrix;
use crate::rational::{self, Q, Vector};
use crate::spaces::{vertex_basis, vertex_matchings, NormedSpace};

/// Search budget of intertwining candidates per pair comparison.
const DISTANCE_BUDGET: usize = 256;

/// Caps on the enumerations behind catalogs and grids.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Unit-sphere points kept per space (vertices first).
    pub max_points: usize,
    /// Forward and backward tuples evaluated per pair.
    pub max_tuples: usize,
    /// Arrows returned per pair.
    pub max_results: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_points: 64, max_tuples: 4096, max_results: 64 }
    }
}

/// One catalog arrow `F ↔ G` with indices into the catalog's space list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogEntry {
    pub arrow: DoubleArrow,
    pub source: usize,
    pub target: usize,
    pub class: ArrowClass,
}

/// A finite truncation of a dense family of `(1,0,1)`-arrows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrowCatalog {
    pub spaces: Vec<NormedSpace>,
    pub entries: Vec<CatalogEntry>,
    /// Declared net fineness: the grid spacing `1/max_denom`.
    pub resolution: Q,
    pub max_denom: u32,
    pub seed: u64,
}

/// The fractions `a/q` with `1 ≤ q ≤ max_denom` and `0 < a < q`, sorted.
pub fn interior_grid(max_denom: u32) -> Vec<Q> {
    let mut out: Vec<Q> = (2..=max_denom as i64)
        .flat_map(|q| (1..q).filter(move |a| a.gcd(&q) == 1).map(move |a| rational::frac(a, q)))
        .collect();
    out.sort();
    out
}

/// The fractions in `[-1, 1]` with denominators at most `max_denom`, ordered
/// by denominator, then numerator, with `0` first.
fn symmetric_grid(max_denom: u32) -> Vec<Q> {
    let mut out = vec![Q::zero()];
    for q in 1..=max_denom.max(1) as i64 {
        for a in 1..=q {
            if a.gcd(&q) == 1 {
                out.push(rational::frac(a, q));
                out.push(rational::frac(-a, q));
            }
        }
    }
    out
}

/// Symmetric hulls of `±eᵢ` and up to `max_vertices/2` extra point pairs on
/// the boundary of the cube with grid coordinates, keeping balls with at most
/// `max_vertices` vertices. `ℓ₁ⁿ` and `ℓ∞ⁿ` are always included. Output is
/// ordered by dimension, then by first appearance, deduplicated by vertex set.
pub fn gen_spaces(max_dim: usize, max_vertices: usize, max_denom: u32) -> Vec<NormedSpace> {
    let mut out: Vec<NormedSpace> = Vec::new();
    for n in 1..=max_dim {
        let mut found: Vec<NormedSpace> = Vec::new();
        let push = |space: NormedSpace, found: &mut Vec<NormedSpace>| {
            if !found.iter().any(|s| s.vertices() == space.vertices()) {
                found.push(space);
            }
        };
        push(if n == 1 { NormedSpace::real() } else { NormedSpace::l1(n) }, &mut found);
        if n > 1 {
            push(NormedSpace::linf(n), &mut found);
        }
        let reps = cube_boundary_reps(n, max_denom);
        let base: Vec<Vector> = (0..n).flat_map(|i| [rational::unit(n, i), rational::neg(&rational::unit(n, i))]).collect();
        for k in 1..=max_vertices / 2 {
            crate::spaces::for_each_combination(reps.len(), k, |idx| {
                let mut points = base.clone();
                for &i in idx {
                    points.push(reps[i].clone());
                    points.push(rational::neg(&reps[i]));
                }
                if let Ok(space) = NormedSpace::from_points(&points, "") {
                    if space.vertices().len() <= max_vertices {
                        push(space, &mut found);
                    }
                }
                true
            });
        }
        for (k, space) in found.into_iter().enumerate() {
            let label = match (n, k) {
                (1, 0) => "R".into(),
                (_, 0) => format!("l1^{n}"),
                (_, 1) => format!("linf^{n}"),
                _ => format!("U{n}.{k}"),
            };
            out.push(space.relabel(label));
        }
    }
    out
}

/// Points with sup-norm one and grid coordinates, one of each `±x` pair.
fn cube_boundary_reps(n: usize, max_denom: u32) -> Vec<Vector> {
    let grid = symmetric_grid(max_denom);
    let mut out = Vec::new();
    let mut point = vec![Q::zero(); n];
    fill(&grid, &mut point, 0, &mut out);
    out.retain(|p| rational::linf_norm(p).is_one() && *p > rational::neg(p));
    out
}

fn fill(grid: &[Q], point: &mut Vec<Q>, depth: usize, out: &mut Vec<Vector>) {
    if depth == point.len() {
        out.push(point.clone());
        return;
    }
    for g in grid {
        point[depth] = g.clone();
        fill(grid, point, depth + 1, out);
    }
}

/// Unit vectors of `space`: its vertices in reverse lexicographic order, then normalized points
/// `(1−t)v + tw` of vertex pairs `v ≠ ±w` at grid weights `t`, at most `max`.
pub fn unit_points(space: &NormedSpace, max_denom: u32, max: usize) -> Vec<Vector> {
    let verts = space.vertices();
    let mut out: Vec<Vector> = verts.iter().rev().take(max).cloned().collect();
    let weights = interior_grid(max_denom);
    'outer: for i in 0..verts.len() {
        for j in i + 1..verts.len() {
            if verts[j] == rational::neg(&verts[i]) {
                continue;
            }
            for t in &weights {
                if out.len() >= max {
                    break 'outer;
                }
                let p = rational::add(&rational::scale(&verts[i], &(Q::one() - t)), &rational::scale(&verts[j], t));
                let norm = space.norm(&p);
                let unit = rational::scale(&p, &norm.recip());
                if !out.contains(&unit) {
                    out.push(unit);
                }
            }
        }
    }
    out
}

/// Arrows `F ↔ G` with `fwd` mapping the vertex basis of `F` to unit points
/// of `G` and `back = (ΦU)⁻¹Φ` for tuples `Φ` of dual unit points, so that
/// `back∘fwd = 1` always. `accept` filters by class.
fn enumerate_arrows(
    f: &NormedSpace,
    g: &NormedSpace,
    max_denom: u32,
    limits: &Limits,
    mut accept: impl FnMut(&ArrowClass) -> bool,
) -> Vec<DoubleArrow> {
    let n = f.dim();
    let m = g.dim();
    if n == 0 || n > m {
        return Vec::new();
    }
    let basis = Matrix::from_cols(&vertex_basis(f), n).expect("basis shape");
    let basis_inv = basis.inverse().expect("vertex basis");
    let points = unit_points(g, max_denom, limits.max_points);
    let dual = g.dual();
    let functionals = unit_points(&dual, max_denom, limits.max_points);
    let mut out = Vec::new();
    let mut spent = 0usize;
    for_each_tuple(points.len(), n, |fi| {
        if out.len() >= limits.max_results || spent >= limits.max_tuples {
            return false;
        }
        spent += 1;
        let cols: Vec<Vector> = fi.iter().map(|&i| points[i].clone()).collect();
        let t = Matrix::from_cols(&cols, m).expect("tuple shape");
        if t.rank() < n {
            return true;
        }
        let u = t.mul(&basis_inv);
        let Ok(fwd) = Operator::new(f.clone(), g.clone(), u.clone()) else { return true };
        if *fwd.norm() > Q::one() {
            return true;
        }
        for_each_tuple(functionals.len(), n, |bi| {
            if out.len() >= limits.max_results || spent >= limits.max_tuples {
                return false;
            }
            spent += 1;
            let rows: Vec<Vector> = bi.iter().map(|&i| functionals[i].clone()).collect();
            let phi = Matrix::from_rows(&rows, m).expect("tuple shape");
            let Ok(inv) = phi.mul(&u).inverse() else { return true };
            let back = inv.mul(&phi);
            if out.iter().any(|d: &DoubleArrow| d.fwd.matrix() == &u && d.back.matrix() == &back) {
                return true;
            }
            let Ok(arrow) = DoubleArrow::from_matrices(f, g, u.clone(), back) else { return true };
            if arrow.classify().is_ok_and(|c| accept(&c)) {
                out.push(arrow);
            }
            true
        });
        true
    });
    out
}

/// Ordered `k`-tuples of distinct indices below `n` whose entries are not
/// equal, in lexicographic order, until `visit` returns `false`.
fn for_each_tuple(n: usize, k: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    fn go(n: usize, tuple: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if tuple.len() == k {
            return visit(tuple);
        }
        for i in 0..n {
            if tuple.contains(&i) {
                continue;
            }
            tuple.push(i);
            let more = go(n, tuple, k, visit);
            tuple.pop();
            if !more {
                return false;
            }
        }
        true
    }
    go(n, &mut Vec::with_capacity(k), k, &mut visit);
}

/// Whether `d` and `e` (same spaces) are intertwined by onto isometries.
fn equivalent(d: &DoubleArrow, e: &DoubleArrow) -> bool {
    if d == e {
        return true;
    }
    arrow_distance_upper(d, e, DISTANCE_BUDGET).is_ok_and(|b| b.eps().is_zero())
}

/// `(1,0,1)`-arrows between every ordered pair `(F, G)` with
/// `dim F ≤ dim G`, deduplicated within each pair under exact intertwining.
pub fn gen_double_arrows(spaces: &[NormedSpace], max_denom: u32) -> ArrowCatalog {
    gen_double_arrows_with(spaces, max_denom, &Limits::default(), 0)
}

/// [`gen_double_arrows`] with explicit limits and a recorded seed.
pub fn gen_double_arrows_with(spaces: &[NormedSpace], max_denom: u32, limits: &Limits, seed: u64) -> ArrowCatalog {
    let mut entries = Vec::new();
    for (si, f) in spaces.iter().enumerate() {
        for (ti, g) in spaces.iter().enumerate() {
            if f.dim() > g.dim() {
                continue;
            }
            let mut kept: Vec<DoubleArrow> = Vec::new();
            for arrow in enumerate_arrows(f, g, max_denom, limits, ArrowClass::is_double) {
                if !kept.iter().any(|k| equivalent(k, &arrow)) {
                    kept.push(arrow);
                }
            }
            for arrow in kept {
                let class = arrow.classify().expect("classified during enumeration");
                entries.push(CatalogEntry { arrow, source: si, target: ti, class });
            }
        }
    }
    ArrowCatalog {
        spaces: spaces.to_vec(),
        entries,
        resolution: rational::frac(1, max_denom.max(1) as i64),
        max_denom,
        seed,
    }
}

/// A catalog arrow `u` with `δα = βu` and `αū = δ̄β` for the searched `δ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrowMatch {
    pub entry: usize,
    pub u: DoubleArrow,
    /// `α: F_u → F`.
    pub a: Operator,
    /// `β: G_u → G`.
    pub b: Operator,
    /// Least `1 + ε` for which the contractive `α`, `β` are `(1+ε)`-isometries.
    pub distortion: Q,
    /// `max(‖δα − βu‖, ‖αū − δ̄β‖)`, zero for exact intertwinings.
    pub defect: Q,
}

impl ArrowMatch {
    pub fn is_exact(&self) -> bool {
        self.defect.is_zero()
    }
}

/// Finds a catalog entry intertwined with `w` by surjective contractive
/// `(1+ε)`-isometries, preferring `w` itself. Without an exact match within
/// `eps`, returns the entry minimizing the intertwining defect over
/// vertex-matching pairs scaled to distortion `≤ 1+ε`; `None` when no entry
/// has `w`'s dimensions.
pub fn match_arrow(w: &DoubleArrow, cat: &ArrowCatalog, eps: &Q) -> Option<ArrowMatch> {
    if let Some(idx) = cat.entries.iter().position(|e| &e.arrow == w) {
        return contractive_match(idx, w, w, Operator::identity(w.source()), Operator::identity(w.target()));
    }
    if let Some(best) = match_arrow_all(w, cat, eps).into_iter().next() {
        return Some(best);
    }
    let limit = &Q::one() + eps;
    let mut best: Option<ArrowMatch> = None;
    let mut dims_present = false;
    for (idx, entry) in cat.entries.iter().enumerate() {
        let u = &entry.arrow;
        if u.source().dim() != w.source().dim() || u.target().dim() != w.target().dim() {
            continue;
        }
        dims_present = true;
        for (a, b) in inexact_pairs(u, w) {
            if let Some(m) = contractive_match(idx, u, w, a, b) {
                let better = best.as_ref().is_none_or(|b| (&m.defect, &m.distortion) < (&b.defect, &b.distortion));
                if m.distortion <= limit && better {
                    best = Some(m);
                }
            }
        }
    }
    if dims_present {
        best
    } else {
        None
    }
}

/// Every exact match with distortion `≤ 1+ε`, by distortion, then entry.
pub fn match_arrow_all(w: &DoubleArrow, cat: &ArrowCatalog, eps: &Q) -> Vec<ArrowMatch> {
    let limit = &Q::one() + eps;
    let mut out: Vec<ArrowMatch> = Vec::new();
    for (idx, entry) in cat.entries.iter().enumerate() {
        let u = &entry.arrow;
        if u.source().dim() != w.source().dim() || u.target().dim() != w.target().dim() {
            continue;
        }
        let Ok(bound) = arrow_distance_upper(u, w, DISTANCE_BUDGET) else { continue };
        if let Some(m) = contractive_match(idx, u, w, bound.a, bound.b) {
            if m.distortion <= limit && m.is_exact() {
                out.push(m);
            }
        }
    }
    out.sort_by(|x, y| (&x.distortion, x.entry).cmp(&(&y.distortion, y.entry)));
    out
}

/// Scales `(a, b)` by `1/max(‖a‖, ‖b‖)` and records distortion and defect.
fn contractive_match(entry: usize, u: &DoubleArrow, w: &DoubleArrow, a: Operator, b: Operator) -> Option<ArrowMatch> {
    let top = a.norm().clone().max(b.norm().clone());
    if top.is_zero() {
        return None;
    }
    let s = top.recip();
    let (a, b) = (a.scale(&s), b.scale(&s));
    let distortion = a.isometry_alpha().ok()?.max(b.isometry_alpha().ok()?);
    let fwd = w.fwd.after(&a).ok()?.distance(&b.after(&u.fwd).ok()?).ok()?;
    let back = a.after(&u.back).ok()?.distance(&w.back.after(&b).ok()?).ok()?;
    Some(ArrowMatch { entry, u: u.clone(), a, b, distortion, defect: fwd.max(back) })
}

/// Vertex-matching pairs `α: F_u → F`, `β: G_u → G`, in lexicographic order.
fn inexact_pairs(u: &DoubleArrow, w: &DoubleArrow) -> Vec<(Operator, Operator)> {
    let firsts = vertex_matchings(u.source(), w.source(), 16);
    let seconds = vertex_matchings(u.target(), w.target(), 64);
    let mut out = Vec::new();
    for a in &firsts {
        for b in &seconds {
            let a = Operator::new(u.source().clone(), w.source().clone(), a.clone()).expect("shape");
            let b = Operator::new(u.target().clone(), w.target().clone(), b.clone()).expect("shape");
            out.push((a, b));
        }
    }
    out
}

/// Contractive `(1+2⁻ᵐ, 0, 1+2⁻ᵐ)`-arrows `F ↔ X` from bounded-denominator
/// unit points, in enumeration order.
pub fn arrow_grid(f: &NormedSpace, x: &NormedSpace, m: u32, max_denom: u32) -> Vec<DoubleArrow> {
    arrow_grid_with(f, x, m, max_denom, &Limits::default())
}

/// [`arrow_grid`] with explicit limits.
pub fn arrow_grid_with(f: &NormedSpace, x: &NormedSpace, m: u32, max_denom: u32, limits: &Limits) -> Vec<DoubleArrow> {
    let bound = ArrowClass::new(grid_constant(m), Q::zero(), grid_constant(m), true);
    enumerate_arrows(f, x, max_denom, limits, |c| c.within(&bound))
}

/// `1 + 2⁻ᵐ`.
pub fn grid_constant(m: u32) -> Q {
    Q::one() + Q::new(1.into(), num_bigint::BigInt::from(2u8).pow(m))
}

/// Vertex-facet incidences `(u, φ)` with `⟨φ, u⟩ = 1`, vertex-major.
pub fn norming_pairs(x: &NormedSpace) -> Vec<(Vector, Vector)> {
    let mut out = Vec::new();
    for v in x.vertices() {
        for phi in x.facets() {
            if rational::dot(phi, v).is_one() {
                out.push((v.clone(), phi.clone()));
            }
        }
    }
    out
}

/// The arrow `(t ↦ tu, φ): ℝ ↔ X`.
pub fn norming_arrow(x: &NormedSpace, u: &[Q], phi: &[Q]) -> Result<DoubleArrow> {
    let fwd = Matrix::from_cols(&[u.to_vec()], x.dim())?;
    let back = Matrix::from_rows(&[phi.to_vec()], x.dim())?;
    DoubleArrow::from_matrices(&NormedSpace::real(), x, fwd, back)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn spaces_for_small_bounds() {
        let one = gen_spaces(1, 4, 4);
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].dim(), 1);
        let two = gen_spaces(2, 4, 1);
        assert!(two.iter().any(|s| s.vertices() == NormedSpace::l1(2).vertices()));
        assert!(two.iter().any(|s| s.vertices() == NormedSpace::linf(2).vertices()));
    }

    #[test]
    fn line_catalog_collapses_signs() {
        let cat = gen_double_arrows(&[NormedSpace::real()], 4);
        assert_eq!(cat.entries.len(), 1);
        assert!(cat.entries[0].class.is_double());
    }

    #[test]
    fn coordinate_arrow_is_in_the_plane_catalog() {
        let spaces = [NormedSpace::real(), NormedSpace::l1(2)];
        let cat = gen_double_arrows(&spaces, 2);
        let coord = DoubleArrow::from_matrices(
            &spaces[0],
            &spaces[1],
            Matrix::from_fn(2, 1, |r, _| int(1 - r as i64)),
            Matrix::from_fn(1, 2, |_, c| int(1 - c as i64)),
        )
        .unwrap();
        let m = match_arrow(&coord, &cat, &Q::zero()).unwrap();
        assert!(m.is_exact() && m.distortion.is_one());
    }

    #[test]
    fn grid_contains_identity_and_coordinates() {
        let l1 = NormedSpace::l1(2);
        assert!(arrow_grid(&l1, &l1, 3, 2).iter().any(|d| d.fwd.matrix().is_identity() && d.back.matrix().is_identity()));
        let r = NormedSpace::real();
        let grid = arrow_grid(&r, &l1, 3, 2);
        let coord = (Matrix::from_fn(2, 1, |r, _| int(1 - r as i64)), Matrix::from_fn(1, 2, |_, c| int(1 - c as i64)));
        assert!(grid.iter().any(|d| d.fwd.matrix() == &coord.0 && d.back.matrix() == &coord.1));
    }

    #[test]
    fn norming_pair_counts() {
        assert_eq!(norming_pairs(&NormedSpace::linf(2)).len(), 8);
        assert_eq!(norming_pairs(&NormedSpace::l1(2)).len(), 8);
        assert_eq!(norming_pairs(&NormedSpace::real()).len(), 2);
    }
}
