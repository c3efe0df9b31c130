//! Exact two-phase simplex over [`Q`] with Bland's rule.
//!
//! This solver is deliberately independent of the double-description code so
//! that the two can cross-check each other: gauges, hull membership and
//! quotient norms are all available here as small linear programs.

use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::rational::{self, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Q, x: Vec<Q> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Q> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

struct Tableau {
    /// `m` constraint rows followed by the objective row; last column is the rhs.
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.rows[0].len()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = self.rows[r].clone();
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= p * &factor;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Runs Bland's rule on columns `< allowed`. Returns `false` when unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        let m = self.basis.len();
        let rhs = self.width() - 1;
        loop {
            let obj = &self.rows[m];
            let Some(enter) = (0..allowed).find(|&j| obj[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, Q)> = None;
            for r in 0..m {
                let a = &self.rows[r][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rows[r][rhs] / a;
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return false;
            };
            self.pivot(r, enter);
        }
    }
}

/// Minimizes `c·x` subject to `a x = b`, `x ≥ 0`.
pub fn minimize(c: &[Q], a: &[Vec<Q>], b: &[Q]) -> LpOutcome {
    let n = c.len();
    let m = a.len();
    let width = n + m + 1;
    let mut rows = Vec::with_capacity(m + 1);
    for (row, rhs) in a.iter().zip(b) {
        debug_assert_eq!(row.len(), n);
        let flip = rhs.is_negative();
        let mut t: Vec<Q> = row.iter().map(|v| if flip { -v } else { v.clone() }).collect();
        t.extend((0..m).map(|_| Q::zero()));
        t.push(if flip { -rhs } else { rhs.clone() });
        rows.push(t);
    }
    for (r, row) in rows.iter_mut().enumerate() {
        row[n + r] = Q::one();
    }
    // Phase one objective: sum of artificials, expressed in non-basic columns.
    let mut obj = rational::zeros(width);
    for row in &rows {
        for j in 0..n {
            obj[j] -= &row[j];
        }
        obj[width - 1] -= &row[width - 1];
    }
    rows.push(obj);
    let mut t = Tableau { rows, basis: (n..n + m).collect() };
    t.optimize(n + m);
    if !t.rows[m][width - 1].is_zero() {
        return LpOutcome::Infeasible;
    }
    // Drive artificials out of the basis, dropping redundant rows.
    let mut r = 0;
    while r < t.basis.len() {
        if t.basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                t.pivot(r, j);
            } else {
                t.rows.remove(r);
                t.basis.remove(r);
                continue;
            }
        }
        r += 1;
    }
    let m = t.basis.len();
    let mut obj = rational::zeros(width);
    obj[..n].clone_from_slice(c);
    for r in 0..m {
        let cb = c[t.basis[r]].clone();
        if cb.is_zero() {
            continue;
        }
        for (v, p) in obj.iter_mut().zip(&t.rows[r]) {
            *v -= p * &cb;
        }
    }
    t.rows[m] = obj;
    if !t.optimize(n) {
        return LpOutcome::Unbounded;
    }
    let mut x = rational::zeros(n);
    for r in 0..m {
        x[t.basis[r]] = t.rows[r][width - 1].clone();
    }
    let value = rational::dot(c, &x);
    LpOutcome::Optimal { value, x }
}

/// Gauge of `x` with respect to `conv(vertices)`, assuming the origin is an
/// interior point: `min Σλ` over `Σλᵢvᵢ = x`, `λ ≥ 0`.
pub fn gauge(vertices: &[Vec<Q>], x: &[Q]) -> Option<Q> {
    let a = columns_as_rows(vertices, x.len());
    let c: Vec<Q> = vertices.iter().map(|_| Q::one()).collect();
    minimize(&c, &a, x).value().cloned()
}

/// Whether `x ∈ conv(points)`.
pub fn in_hull(points: &[Vec<Q>], x: &[Q]) -> bool {
    let mut a = columns_as_rows(points, x.len());
    a.push(points.iter().map(|_| Q::one()).collect());
    let mut b = x.to_vec();
    b.push(Q::one());
    let c = rational::zeros(points.len());
    matches!(minimize(&c, &a, &b), LpOutcome::Optimal { .. })
}

/// `inf { gauge(x + Σμⱼkⱼ) }` over real `μ`, the quotient norm of `x` modulo
/// `span(kernel)`.
pub fn quotient_gauge(vertices: &[Vec<Q>], kernel: &[Vec<Q>], x: &[Q]) -> Option<Q> {
    let dim = x.len();
    let mut cols: Vec<Vec<Q>> = vertices.to_vec();
    for k in kernel {
        cols.push(rational::neg(k));
        cols.push(k.clone());
    }
    let a = columns_as_rows(&cols, dim);
    let mut c: Vec<Q> = vertices.iter().map(|_| Q::one()).collect();
    c.extend((0..2 * kernel.len()).map(|_| Q::zero()));
    minimize(&c, &a, x).value().cloned()
}

/// The distance from `x` to `span(basis)` and the coefficients of a nearest
/// point `Σcⱼbⱼ`.
pub fn nearest_in_span(vertices: &[Vec<Q>], basis: &[Vec<Q>], x: &[Q]) -> Option<(Q, Vec<Q>)> {
    let dim = x.len();
    let mut cols: Vec<Vec<Q>> = vertices.to_vec();
    for k in basis {
        cols.push(rational::neg(k));
        cols.push(k.clone());
    }
    let a = columns_as_rows(&cols, dim);
    let mut c: Vec<Q> = vertices.iter().map(|_| Q::one()).collect();
    c.extend((0..2 * basis.len()).map(|_| Q::zero()));
    let LpOutcome::Optimal { value, x: sol } = minimize(&c, &a, x) else {
        return None;
    };
    let nv = vertices.len();
    let coeffs = (0..basis.len()).map(|j| &sol[nv + 2 * j + 1] - &sol[nv + 2 * j]).collect();
    Some((value, coeffs))
}

fn columns_as_rows(cols: &[Vec<Q>], dim: usize) -> Vec<Vec<Q>> {
    (0..dim).map(|i| cols.iter().map(|v| v[i].clone()).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};
    use alloc::vec;

    fn square() -> Vec<Vec<Q>> {
        vec![vec![int(1), int(1)], vec![int(1), int(-1)], vec![int(-1), int(1)], vec![int(-1), int(-1)]]
    }

    #[test]
    fn gauge_of_square() {
        assert_eq!(gauge(&square(), &[int(3), frac(1, 2)]), Some(int(3)));
        assert_eq!(gauge(&square(), &[int(0), int(0)]), Some(int(0)));
    }

    #[test]
    fn membership() {
        assert!(in_hull(&square(), &[frac(1, 2), int(1)]));
        assert!(!in_hull(&square(), &[frac(3, 2), int(0)]));
    }

    #[test]
    fn quotient_of_l1_plane() {
        let cross = vec![vec![int(1), int(0)], vec![int(-1), int(0)], vec![int(0), int(1)], vec![int(0), int(-1)]];
        let k = vec![vec![int(1), int(-1)]];
        assert_eq!(quotient_gauge(&cross, &k, &[int(1), int(0)]), Some(int(1)));
        assert_eq!(quotient_gauge(&square(), &k, &[int(1), int(0)]), Some(frac(1, 2)));
    }

    #[test]
    fn nearest_point_on_a_diagonal() {
        let (dist, coeffs) = nearest_in_span(&square(), &[vec![int(1), int(1)]], &[int(1), int(0)]).unwrap();
        assert_eq!(dist, frac(1, 2));
        assert_eq!(coeffs, vec![frac(1, 2)]);
    }

    #[test]
    fn unbounded_and_infeasible() {
        let a = vec![vec![int(1), int(-1)]];
        assert_eq!(minimize(&[int(-1), int(0)], &a, &[int(0)]), LpOutcome::Unbounded);
        let a = vec![vec![int(1)], vec![int(1)]];
        assert_eq!(minimize(&[int(0)], &a, &[int(1), int(2)]), LpOutcome::Infeasible);
    }
}
