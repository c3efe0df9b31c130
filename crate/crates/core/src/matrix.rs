//! Dense row-major matrices over [`Q`].

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Q};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", rational::to_text(&self[(r, c)]))?;
            }
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Q;
    fn index(&self, (r, c): (usize, usize)) -> &Q {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Q {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = Q::one();
        }
        m
    }

    /// Builds a matrix from rows of equal length. An empty list yields a
    /// `0 × cols` matrix.
    pub fn from_rows(rows: &[Vec<Q>], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: row.len() });
            }
            data.extend(row.iter().cloned());
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_cols(cols: &[Vec<Q>], rows: usize) -> Result<Self> {
        let mut m = Matrix::zeros(rows, cols.len());
        for (c, col) in cols.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch { expected: rows, found: col.len() });
            }
            for (r, v) in col.iter().enumerate() {
                m[(r, c)] = v.clone();
            }
        }
        Ok(m)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Q) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Q] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<Q> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn row_vectors(&self) -> Vec<Vec<Q>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn col_vectors(&self) -> Vec<Vec<Q>> {
        (0..self.cols).map(|c| self.col(c)).collect()
    }

    pub fn entries(&self) -> &[Q] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = &other[(k, c)];
                    if !b.is_zero() {
                        out[(r, c)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape");
        (0..self.rows).map(|r| rational::dot(self.row(r), v)).collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix sum shape");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix difference shape");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: &Q) -> Matrix {
        let data = self.data.iter().map(|a| a * s).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == Matrix::identity(self.rows)
    }

    /// Largest absolute entry; zero exactly when the matrix is zero.
    pub fn max_abs(&self) -> Q {
        self.data.iter().map(Signed::abs).max().unwrap_or_else(Q::zero)
    }

    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "hstack rows");
        Matrix::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self[(r, c)].clone()
            } else {
                other[(r, c - self.cols)].clone()
            }
        })
    }

    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "vstack cols");
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn block_diag(&self, other: &Matrix) -> Matrix {
        Matrix::from_fn(self.rows + other.rows, self.cols + other.cols, |r, c| {
            if r < self.rows && c < self.cols {
                self[(r, c)].clone()
            } else if r >= self.rows && c >= self.cols {
                other[(r - self.rows, c - self.cols)].clone()
            } else {
                Q::zero()
            }
        })
    }

    pub fn select_cols(&self, cols: &[usize]) -> Matrix {
        Matrix::from_fn(self.rows, cols.len(), |r, c| self[(r, cols[c])].clone())
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        Matrix::from_fn(rows.len(), self.cols, |r, c| self[(rows[r], c)].clone())
    }

    /// Reduced row echelon form and the pivot column of each nonzero row.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut lead_row = 0;
        for c in 0..m.cols {
            if lead_row == m.rows {
                break;
            }
            let Some(p) = (lead_row..m.rows).find(|&r| !m[(r, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(p, lead_row);
            let inv = m[(lead_row, c)].recip();
            for k in 0..m.cols {
                let v = &m[(lead_row, k)] * &inv;
                m[(lead_row, k)] = v;
            }
            for r in 0..m.rows {
                if r == lead_row || m[(r, c)].is_zero() {
                    continue;
                }
                let factor = m[(r, c)].clone();
                for k in 0..m.cols {
                    let v = &m[(lead_row, k)] * &factor;
                    m[(r, k)] -= v;
                }
            }
            pivots.push(c);
            lead_row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch { expected: self.rows, found: self.cols });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Matrix::zeros(0, 0));
        }
        let (reduced, pivots) = self.hstack(&Matrix::identity(n)).rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(Error::Singular);
        }
        Ok(Matrix::from_fn(n, n, |r, c| reduced[(r, n + c)].clone()))
    }

    /// Solves `self · X = rhs` for a square invertible `self`.
    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        Ok(self.inverse()?.mul(rhs))
    }

    /// Coordinates of `v` in the column space basis of `self`, when `v`
    /// lies in that span and the columns are independent.
    pub fn coordinates(&self, v: &[Q]) -> Option<Vec<Q>> {
        let augmented = self.hstack(&Matrix::from_cols(&[v.to_vec()], self.rows).ok()?);
        let (reduced, pivots) = augmented.rref();
        if pivots.contains(&self.cols) || pivots.len() < self.cols {
            return None;
        }
        Some((0..self.cols).map(|k| reduced[(k, self.cols)].clone()).collect())
    }

    /// Indices of a maximal independent subset of the columns, chosen
    /// greedily from the left.
    pub fn independent_cols(&self) -> Vec<usize> {
        self.rref().1
    }

    /// A basis of `{x : self·x = 0}`, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Q>> {
        let (reduced, pivots) = self.rref();
        (0..self.cols)
            .filter(|c| !pivots.contains(c))
            .map(|free| {
                let mut v = vec![Q::zero(); self.cols];
                v[free] = Q::one();
                for (r, &p) in pivots.iter().enumerate() {
                    v[p] = -reduced[(r, free)].clone();
                }
                v
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn m(rows: &[&[i64]]) -> Matrix {
        let rows: Vec<Vec<Q>> = rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        let cols = rows.first().map_or(0, Vec::len);
        Matrix::from_rows(&rows, cols).unwrap()
    }

    #[test]
    fn inverse_of_two_by_two() {
        let a = m(&[&[1, 1], &[1, -1]]);
        let inv = a.inverse().unwrap();
        assert_eq!(inv, Matrix::from_fn(2, 2, |r, c| if r == 1 && c == 1 { frac(-1, 2) } else { frac(1, 2) }));
        assert!(a.mul(&inv).is_identity());
    }

    #[test]
    fn singular_is_rejected() {
        assert_eq!(m(&[&[1, 2], &[2, 4]]).inverse(), Err(Error::Singular));
    }

    #[test]
    fn rank_and_pivots() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[0, 0, 1]]);
        let (_, pivots) = a.rref();
        assert_eq!(pivots, [0, 2]);
        assert_eq!(a.rank(), 2);
        let null = a.nullspace();
        assert_eq!(null, [alloc::vec![int(-2), int(1), int(0)]]);
        assert!(rational::is_zero(&a.apply(&null[0])));
    }

    #[test]
    fn coordinates_in_span() {
        let basis = m(&[&[1, 0], &[1, 1], &[0, 1]]);
        assert_eq!(basis.coordinates(&[int(2), int(5), int(3)]), Some(alloc::vec![int(2), int(3)]));
        assert_eq!(basis.coordinates(&[int(1), int(0), int(0)]), None);
    }

    #[test]
    fn empty_shapes() {
        let a = Matrix::zeros(0, 3);
        let b = Matrix::zeros(3, 2);
        assert_eq!(a.mul(&b), Matrix::zeros(0, 2));
        assert_eq!(Matrix::identity(0).inverse(), Ok(Matrix::zeros(0, 0)));
    }
}
