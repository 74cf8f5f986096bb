//! Geometric primitives: star bodies K ⊂ R^n, convex bodies Q ⊂ R^m
//! containing the origin, their support/radial/gauge functions, boundary
//! decompositions, volumes and linear images.

mod hull;
mod linear;
mod polytope;
mod qbody;
mod radial_table;
mod star;

pub(crate) use hull::complement_basis;
pub use linear::LinearMap;
pub use polytope::{Facet, Polytope};
pub use qbody::{QBody, MAX_Q_DIM};
pub use radial_table::RadialTable;
pub use star::{Ellipsoid, LqBall, StarBody};

use nalgebra::DVector;

/// One piece of ∂K: a point, its outer unit normal, an (n-1)-measure weight
/// and the cosine term z·ν(z).
///
/// Polytope facets are aggregated into a single element each, since every
/// integrand here depends on z only through ν(z) and z·ν(z).
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryElement {
    pub point: DVector<f64>,
    pub normal: DVector<f64>,
    pub weight: f64,
    pub cosine: f64,
}

/// Boundary elements of a body, with a coarser companion set when the
/// decomposition is a quadrature rather than exact.
#[derive(Clone, Debug)]
pub struct BoundarySet {
    pub elements: Vec<BoundaryElement>,
    pub coarse: Option<Vec<BoundaryElement>>,
    pub exact: bool,
    pub method: String,
}

impl BoundarySet {
    /// Σ w·c / n, the divergence-formula volume.
    pub fn volume(&self, n: usize) -> f64 {
        divergence_volume(&self.elements, n)
    }

    pub fn coarse_volume(&self, n: usize) -> Option<f64> {
        self.coarse.as_ref().map(|c| divergence_volume(c, n))
    }
}

pub(crate) fn divergence_volume(elements: &[BoundaryElement], n: usize) -> f64 {
    let terms: Vec<f64> = elements.iter().map(|e| e.weight * e.cosine).collect();
    crate::special::pairwise_sum(&terms) / n as f64
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
