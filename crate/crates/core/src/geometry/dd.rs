//! Double description for pointed polyhedral cones `{z : ⟨h, z⟩ ≥ 0}`.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::matrix::Matrix;
use crate::rational::{self, Q};

/// Fixed-width bitset over constraint indices.
#[derive(Clone, PartialEq, Eq)]
struct ZeroSet(Vec<u64>);

impl ZeroSet {
    fn new(bits: usize) -> Self {
        ZeroSet(vec![0; bits.div_ceil(64)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and(&self, other: &ZeroSet) -> ZeroSet {
        ZeroSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn contains_all(&self, other: &ZeroSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & b == *b)
    }
}

struct Ray {
    z: Vec<Q>,
    zeros: ZeroSet,
}

/// Extreme rays of the cone cut out by `rows`, each as a primitive integer
/// vector, or `None` when the cone is not pointed (rows of rank below `n`).
pub fn extreme_rays(rows: &[Vec<Q>], n: usize) -> Option<Vec<Vec<Q>>> {
    if n == 0 {
        return Some(Vec::new());
    }
    let all = Matrix::from_rows(rows, n).ok()?;
    let basis_rows = all.transpose().independent_cols();
    if basis_rows.len() < n {
        return None;
    }
    let inv = all.select_rows(&basis_rows).inverse().ok()?;
    let bits = rows.len();
    let mut rays: Vec<Ray> = (0..n)
        .map(|k| {
            let mut zeros = ZeroSet::new(bits);
            for (idx, &r) in basis_rows.iter().enumerate() {
                if idx != k {
                    zeros.insert(r);
                }
            }
            Ray { z: rational::primitive(&inv.col(k)), zeros }
        })
        .collect();
    let mut processed = basis_rows.clone();
    for (h_index, h) in rows.iter().enumerate() {
        if basis_rows.contains(&h_index) {
            continue;
        }
        let values: Vec<Q> = rays.iter().map(|r| rational::dot(h, &r.z)).collect();
        let positive: Vec<usize> = (0..rays.len()).filter(|&k| values[k].is_positive()).collect();
        let negative: Vec<usize> = (0..rays.len()).filter(|&k| values[k].is_negative()).collect();
        processed.push(h_index);
        if negative.is_empty() {
            for (k, ray) in rays.iter_mut().enumerate() {
                if values[k].is_zero() {
                    ray.zeros.insert(h_index);
                }
            }
            continue;
        }
        let mut fresh = Vec::new();
        for &p in &positive {
            for &q in &negative {
                let common = rays[p].zeros.and(&rays[q].zeros);
                if common.count() + 2 < n {
                    continue;
                }
                let blocked = rays
                    .iter()
                    .enumerate()
                    .any(|(k, r)| k != p && k != q && r.zeros.contains_all(&common));
                if blocked {
                    continue;
                }
                let w = rational::sub(
                    &rational::scale(&rays[q].z, &values[p]),
                    &rational::scale(&rays[p].z, &values[q]),
                );
                let mut zeros = common;
                zeros.insert(h_index);
                fresh.push(Ray { z: rational::primitive(&w), zeros });
            }
        }
        let mut kept: Vec<Ray> = Vec::with_capacity(rays.len() + fresh.len());
        for (k, mut ray) in rays.into_iter().enumerate() {
            if values[k].is_negative() {
                continue;
            }
            if values[k].is_zero() {
                ray.zeros.insert(h_index);
            }
            kept.push(ray);
        }
        kept.extend(fresh);
        rays = kept;
    }
    let mut out: Vec<Vec<Q>> = rays.into_iter().map(|r| r.z).collect();
    out.sort();
    out.dedup();
    Some(out)
}

/// Vertices of `{x : ⟨aⱼ, x⟩ ≤ 1 ∀j}`, or `None` when the region is
/// unbounded.
pub fn polar_vertices(rows: &[Vec<Q>], n: usize) -> Option<Vec<Vec<Q>>> {
    let mut cone_rows: Vec<Vec<Q>> = rows
        .iter()
        .map(|a| {
            let mut h = rational::neg(a);
            h.push(Q::from_integer(1.into()));
            h
        })
        .collect();
    let mut t_row = rational::zeros(n + 1);
    t_row[n] = Q::from_integer(1.into());
    cone_rows.push(t_row);
    let rays = extreme_rays(&cone_rows, n + 1)?;
    let mut out = Vec::with_capacity(rays.len());
    for ray in rays {
        let t = ray[n].clone();
        if t.is_zero() {
            return None;
        }
        out.push(ray[..n].iter().map(|v| v / &t).collect::<Vec<Q>>());
    }
    out.sort();
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn v(xs: &[i64]) -> Vec<Q> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn square_from_cross_facets() {
        let facets = [v(&[1, 0]), v(&[-1, 0]), v(&[0, 1]), v(&[0, -1])];
        let verts = polar_vertices(&facets, 2).unwrap();
        assert_eq!(verts, [v(&[-1, -1]), v(&[-1, 1]), v(&[1, -1]), v(&[1, 1])]);
    }

    #[test]
    fn half_plane_is_unbounded() {
        let facets = [v(&[1, 0]), v(&[0, 1]), v(&[0, -1])];
        assert_eq!(polar_vertices(&facets, 2), None);
    }

    #[test]
    fn octant_rays() {
        let rows = [v(&[1, 0, 0]), v(&[0, 1, 0]), v(&[0, 0, 1]), v(&[1, 1, 1])];
        let rays = extreme_rays(&rows, 3).unwrap();
        assert_eq!(rays, [v(&[0, 0, 1]), v(&[0, 1, 0]), v(&[1, 0, 0])]);
    }
}
