use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;
use core::sync::atomic::{AtomicUsize, Ordering};

use num_traits::{One, Zero};
use once_cell::race::OnceBox;

use super::dd;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::{self, Q, Vector};

static DIMENSION_CAP: AtomicUsize = AtomicUsize::new(8);

/// Largest ambient dimension the conversion routines accept.
pub fn dimension_cap() -> usize {
    DIMENSION_CAP.load(Ordering::Relaxed)
}

pub fn set_dimension_cap(cap: usize) {
    DIMENSION_CAP.store(cap, Ordering::Relaxed);
}

fn check_cap(dim: usize, vertices: usize) -> Result<()> {
    let cap = dimension_cap();
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap, vertices });
    }
    Ok(())
}

/// A convex polytope stored by its extreme points. Facets `φ` describe the
/// inequalities `⟨φ, x⟩ ≤ 1` and are computed on first use.
pub struct Polytope {
    dim: usize,
    vertices: Vec<Vector>,
    facets: OnceBox<Vec<Vector>>,
    symmetric: bool,
}

impl Clone for Polytope {
    fn clone(&self) -> Self {
        let facets = OnceBox::new();
        if let Some(f) = self.facets.get() {
            let _ = facets.set(Box::new(f.clone()));
        }
        Polytope { dim: self.dim, vertices: self.vertices.clone(), facets, symmetric: self.symmetric }
    }
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.vertices == other.vertices
    }
}

impl Eq for Polytope {}

impl fmt::Debug for Polytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Polytope")
            .field("dim", &self.dim)
            .field("vertices", &self.vertices.len())
            .field("symmetric", &self.symmetric)
            .finish()
    }
}

fn is_symmetric(sorted: &[Vector]) -> bool {
    sorted.iter().all(|v| sorted.binary_search(&rational::neg(v)).is_ok())
}

/// Keeps the functionals whose tight vertices span the space.
fn irredundant(functionals: Vec<Vector>, vertices: &[Vector], dim: usize) -> Vec<Vector> {
    let mut out: Vec<Vector> = functionals
        .into_iter()
        .filter(|phi| {
            let tight: Vec<Vector> =
                vertices.iter().filter(|v| rational::dot(phi, v).is_one()).cloned().collect();
            !tight.is_empty() && Matrix::from_rows(&tight, dim).map(|m| m.rank() == dim).unwrap_or(false)
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

impl Polytope {
    fn from_sorted(dim: usize, vertices: Vec<Vector>, facets: Option<Vec<Vector>>) -> Self {
        let symmetric = is_symmetric(&vertices);
        let cache = OnceBox::new();
        if let Some(f) = facets {
            let _ = cache.set(Box::new(f));
        }
        Polytope { dim, vertices, facets: cache, symmetric }
    }

    /// Trusted constructor for bodies whose extreme points and facets are
    /// known in closed form (coordinate balls, direct sums).
    pub(crate) fn from_parts(dim: usize, mut vertices: Vec<Vector>, mut facets: Vec<Vector>) -> Result<Self> {
        check_cap(dim, vertices.len())?;
        vertices.sort();
        vertices.dedup();
        facets.sort();
        facets.dedup();
        Ok(Polytope::from_sorted(dim, vertices, Some(facets)))
    }

    /// The extreme points of `conv(points)`, in lexicographic order.
    pub fn hull(points: &[Vector]) -> Result<Polytope> {
        let dim = points.first().ok_or(Error::EmptyInput)?.len();
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
        }
        let mut pts: Vec<Vector> = points.to_vec();
        pts.sort();
        pts.dedup();
        if pts.len() == 1 {
            let facets = if dim == 0 { Some(Vec::new()) } else { None };
            return Ok(Polytope::from_sorted(dim, pts, facets));
        }
        let count = Q::from_integer((pts.len() as i64).into());
        let centroid: Vector = (0..dim)
            .map(|i| pts.iter().fold(Q::zero(), |acc, p| acc + &p[i]) / &count)
            .collect();
        let shifted: Vec<Vector> = pts.iter().map(|p| rational::sub(p, &centroid)).collect();
        let (_, pivots) = Matrix::from_rows(&shifted, dim)?.rref();
        let r = pivots.len();
        check_cap(r, pts.len())?;
        let local: Vec<Vector> = shifted.iter().map(|d| pivots.iter().map(|&c| d[c].clone()).collect()).collect();
        let local_facets = dd::polar_vertices(&local, r).ok_or(Error::Unbounded)?;
        let extreme: Vec<Vector> = pts
            .iter()
            .zip(&local)
            .filter(|(_, y)| {
                let tight: Vec<Vector> =
                    local_facets.iter().filter(|phi| rational::dot(phi, y).is_one()).cloned().collect();
                Matrix::from_rows(&tight, r).map(|m| m.rank() == r).unwrap_or(false)
            })
            .map(|(p, _)| p.clone())
            .collect();
        let facets = (r == dim && rational::is_zero(&centroid)).then_some(local_facets);
        Ok(Polytope::from_sorted(dim, extreme, facets))
    }

    /// The polytope `{x : ⟨φ, x⟩ ≤ 1 for every φ}`; the stored facets are the
    /// irredundant subset of the input.
    pub fn from_facets(facets: &[Vector], dim: usize) -> Result<Polytope> {
        if let Some(bad) = facets.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
        }
        if dim == 0 {
            return Ok(Polytope::from_sorted(0, alloc::vec![Vec::new()], Some(Vec::new())));
        }
        check_cap(dim, 0)?;
        let rows: Vec<Vector> = facets.iter().filter(|f| !rational::is_zero(f)).cloned().collect();
        let vertices = dd::polar_vertices(&rows, dim).ok_or(Error::Unbounded)?;
        let minimal = irredundant(rows, &vertices, dim);
        Ok(Polytope::from_sorted(dim, vertices, Some(minimal)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn has_facets(&self) -> bool {
        self.facets.get().is_some()
    }

    pub fn is_full_dimensional(&self) -> bool {
        if self.dim == 0 {
            return true;
        }
        let base = &self.vertices[0];
        let diffs: Vec<Vector> = self.vertices.iter().map(|v| rational::sub(v, base)).collect();
        Matrix::from_rows(&diffs, self.dim).map(|m| m.rank() == self.dim).unwrap_or(false)
    }

    /// Facet functionals, computed by polarity on first call.
    pub fn facets(&self) -> Result<&[Vector]> {
        if let Some(f) = self.facets.get() {
            return Ok(f);
        }
        check_cap(self.dim, self.vertices.len())?;
        let polar = match dd::polar_vertices(&self.vertices, self.dim) {
            Some(p) => p,
            None if !self.is_full_dimensional() => return Err(Error::NotFullDimensional),
            None => return Err(Error::OriginNotInterior),
        };
        Ok(self.facets.get_or_init(|| Box::new(polar)))
    }

    /// Returns a copy whose facet cache is populated.
    pub fn with_facets(&self) -> Result<Polytope> {
        self.facets()?;
        Ok(self.clone())
    }

    /// `max_φ ⟨φ, x⟩`, the gauge when the origin is interior.
    pub fn gauge(&self, x: &[Q]) -> Result<Q> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        let facets = self.facets()?;
        Ok(facets.iter().map(|phi| rational::dot(phi, x)).max().unwrap_or_else(Q::zero))
    }

    /// Membership through the H-representation.
    pub fn contains(&self, x: &[Q]) -> Result<bool> {
        Ok(self.gauge(x)? <= Q::one())
    }

    pub fn linear_image(&self, m: &Matrix) -> Result<Polytope> {
        if m.cols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: m.cols() });
        }
        let images: Vec<Vector> = self.vertices.iter().map(|v| m.apply(v)).collect();
        Polytope::hull(&images)
    }

    /// The intersection with `span(basis)`, in the coordinates of `basis`.
    pub fn section(&self, basis: &[Vector]) -> Result<Polytope> {
        if let Some(bad) = basis.iter().find(|b| b.len() != self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim, found: bad.len() });
        }
        let k = basis.len();
        let b = Matrix::from_cols(basis, self.dim)?;
        if b.rank() < k {
            return Err(Error::DependentBasis);
        }
        let restricted: Vec<Vector> = self.facets()?.iter().map(|phi| b.transpose().apply(phi)).collect();
        let mut restricted: Vec<Vector> = restricted.into_iter().filter(|f| !rational::is_zero(f)).collect();
        restricted.sort();
        restricted.dedup();
        Polytope::from_facets(&restricted, k)
    }

    /// The polar body `{φ : ⟨φ, v⟩ ≤ 1}` as a polytope whose vertices are the
    /// facets of `self`.
    pub fn polar(&self) -> Result<Polytope> {
        let facets = self.facets()?.to_vec();
        let own = irredundant(self.vertices.clone(), &facets, self.dim);
        Ok(Polytope::from_sorted(self.dim, facets, Some(own)))
    }
}
