//! Seeded generators of rational test instances.

use polyarrow_core::arrows::{ArrowClass, DoubleArrow, Operator};
use polyarrow_core::catalog::{norming_arrow, norming_pairs};
use polyarrow_core::spaces::direct_sum;
use polyarrow_core::{rational, Matrix, NormedSpace, SumKind, Vector, Q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A deterministic stream of rationals, matrices, spaces and arrows with
/// denominators at most `max_denom`.
pub struct Sampler {
    rng: ChaCha8Rng,
    max_denom: i64,
}

impl Sampler {
    pub fn new(seed: u64, max_denom: u32) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), max_denom: i64::from(max_denom.max(1)) }
    }

    /// Uniform in `lo..=hi`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.gen_range(lo..=hi)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.gen_bool(0.5)
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.rng.gen_range(0..items.len())]
    }

    /// `p/q` in `[-1, 1]`.
    pub fn rational(&mut self) -> Q {
        let q = self.rng.gen_range(1..=self.max_denom);
        rational::frac(self.rng.gen_range(-q..=q), q)
    }

    /// `p/q` in `(0, 1]`.
    pub fn positive_unit(&mut self) -> Q {
        let q = self.rng.gen_range(1..=self.max_denom);
        rational::frac(self.rng.gen_range(1..=q), q)
    }

    pub fn vector(&mut self, n: usize) -> Vector {
        (0..n).map(|_| self.rational()).collect()
    }

    pub fn nonzero_vector(&mut self, n: usize) -> Vector {
        loop {
            let v = self.vector(n);
            if !rational::is_zero(&v) {
                return v;
            }
        }
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| self.rational())
    }

    pub fn nonzero_matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        loop {
            let m = self.matrix(rows, cols);
            if !m.is_zero() || rows == 0 || cols == 0 {
                return m;
            }
        }
    }

    /// A `rows × cols` matrix of rank `cols`; requires `rows ≥ cols`.
    pub fn injective(&mut self, rows: usize, cols: usize) -> Matrix {
        assert!(rows >= cols, "an injective matrix needs rows >= cols");
        loop {
            let m = self.matrix(rows, cols);
            if m.rank() == cols {
                return m;
            }
        }
    }

    /// A space of the given dimension: `ℓ₁ⁿ`, `ℓ∞ⁿ`, or the hull of `±eᵢ` and
    /// one or two random symmetric pairs. Lines are `[-c, c]` balls.
    pub fn space(&mut self, dim: usize) -> NormedSpace {
        match dim {
            0 => NormedSpace::zero(),
            1 => {
                let c = if self.coin() { rational::one() } else { rational::one() / (rational::one() + self.positive_unit()) };
                NormedSpace::from_points(&[vec![c.clone()], vec![-c]], "line").expect("segment")
            }
            _ => match self.range(0, 2) {
                0 => NormedSpace::l1(dim),
                1 => NormedSpace::linf(dim),
                _ => {
                    let mut points: Vec<Vector> = Vec::new();
                    for i in 0..dim {
                        points.push(rational::unit(dim, i));
                        points.push(rational::neg(&rational::unit(dim, i)));
                    }
                    for _ in 0..self.range(1, 2) {
                        let v = self.nonzero_vector(dim);
                        points.push(rational::neg(&v));
                        points.push(v);
                    }
                    NormedSpace::from_points(&points, format!("S{dim}")).expect("symmetric full-dimensional hull")
                }
            },
        }
    }

    /// `space(d)` with `d` uniform in `lo..=hi`.
    pub fn space_in(&mut self, lo: usize, hi: usize) -> NormedSpace {
        let d = self.range(lo, hi);
        self.space(d)
    }

    /// A nonzero operator of norm at most one; exactly one half the time.
    pub fn contraction(&mut self, domain: &NormedSpace, codomain: &NormedSpace) -> Operator {
        let m = self.nonzero_matrix(codomain.dim(), domain.dim());
        let t = Operator::new(domain.clone(), codomain.clone(), m).expect("sizes agree");
        if t.norm() == &rational::zero() {
            return t;
        }
        let factor = if self.coin() { rational::one() } else { self.positive_unit() };
        let s = factor / t.norm();
        t.scale(&s)
    }

    /// A `(1,0,1)`-arrow out of `a`: the inclusion of `a` into `a ⊕ Z` with
    /// `dim Z = extra` and the coordinate projection, or a norming arrow
    /// when `a` is the scalar field.
    pub fn double_arrow(&mut self, a: &NormedSpace, extra: usize) -> DoubleArrow {
        if extra == 0 {
            return DoubleArrow::identity(a);
        }
        if a == &NormedSpace::real() && self.coin() {
            let x = self.space(extra + 1);
            let pairs = norming_pairs(&x);
            let (u, phi) = self.pick(&pairs).clone();
            return norming_arrow(&x, &u, &phi).expect("norming pairs give double arrows");
        }
        let z = self.space(extra);
        let kind = if self.coin() { SumKind::L1 } else { SumKind::LInf };
        let b = direct_sum(a, &z, kind).expect("small sums stay under the cap");
        let (n, total) = (a.dim(), b.dim());
        let fwd = Matrix::from_fn(total, n, |r, c| if r == c { rational::one() } else { rational::zero() });
        DoubleArrow::from_matrices(a, &b, fwd.clone(), fwd.transpose()).expect("sizes agree")
    }

    /// `double_arrow(a, e)` with `e` uniform in `lo..=hi`.
    pub fn double_arrow_in(&mut self, a: &NormedSpace, lo: usize, hi: usize) -> DoubleArrow {
        let extra = self.range(lo, hi);
        self.double_arrow(a, extra)
    }

    /// A contractive `(1+ε, ε, 1)`-arrow near the `(1,0,1)`-arrow `d`.
    pub fn almost_double(&mut self, d: &DoubleArrow, eps: &Q) -> DoubleArrow {
        let one = rational::one();
        let bound = ArrowClass::new(&one + eps, eps.clone(), one.clone(), true);
        let (a, b) = (d.source().clone(), d.target().clone());
        let mut delta = eps.clone();
        for _ in 0..8 {
            if delta == rational::zero() {
                break;
            }
            let f = d.fwd.matrix().add(&self.matrix(b.dim(), a.dim()).scale(&delta));
            let g = d.back.matrix().add(&self.matrix(a.dim(), b.dim()).scale(&delta));
            let Ok(candidate) = DoubleArrow::from_matrices(&a, &b, f, g) else { continue };
            let (nf, ng) = (candidate.fwd.norm().clone(), candidate.back.norm().clone());
            let sf = if nf > one { one.clone() / &nf } else { one.clone() };
            let sg = if ng > one { one.clone() / &ng } else { one.clone() };
            let candidate = candidate.scaled(&sf, &sg);
            if candidate.classify().is_ok_and(|c| c.within(&bound)) {
                return candidate;
            }
            delta /= rational::int(2);
        }
        d.clone()
    }

    /// An arrow `a ↔ b` with injective forward map and `‖back‖ ≥ 1`.
    /// Requires `dim b ≥ dim a`.
    pub fn arrow(&mut self, a: &NormedSpace, b: &NormedSpace) -> DoubleArrow {
        let f = self.injective(b.dim(), a.dim());
        let g = self.nonzero_matrix(a.dim(), b.dim());
        let d = DoubleArrow::from_matrices(a, b, f, g).expect("sizes agree");
        let ng = d.back.norm().clone();
        let stretch = (rational::one() + self.positive_unit()) / &ng;
        d.scaled(&rational::one(), &stretch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let (mut a, mut b) = (Sampler::new(5, 8), Sampler::new(5, 8));
        for _ in 0..20 {
            assert_eq!(a.rational(), b.rational());
        }
        assert_eq!(a.space(3), b.space(3));
    }

    #[test]
    fn generated_arrows_have_their_classes() {
        let mut s = Sampler::new(11, 8);
        let eps = rational::frac(1, 10);
        let one = rational::one();
        for dim in 1..=2 {
            let a = s.space(dim);
            let d = s.double_arrow(&a, 1);
            assert!(d.classify().unwrap().is_double());
            let near = s.almost_double(&d, &eps).classify().unwrap();
            assert!(near.within(&ArrowClass::new(&one + &eps, eps.clone(), one.clone(), true)));
            let t = s.contraction(&a, d.target());
            assert!(t.norm() <= &one);
            let b = s.space(dim + 1);
            assert!(s.arrow(&a, &b).back.norm() >= &one);
        }
    }
}
