use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::hull::{self, facet_measure};
use super::{BoundaryElement, BoundarySet, LinearMap};
use crate::error::{Error, Result};

/// Relative gap below which two facets count as tied for the gauge.
pub(crate) const RIDGE_TIE: f64 = 1e-9;

/// A facet of a convex polytope: unit outer normal ν, support value
/// h_K(ν) (the distance of the facet plane from the origin), (n-1)-measure
/// and centroid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub measure: f64,
    pub centroid: Vec<f64>,
}

/// Convex polytope in R^n with the origin in its interior.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    facets: Vec<Facet>,
}

impl Polytope {
    /// Convex hull of `points`. Non-extreme points are dropped.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        if dim < 2 {
            return Err(Error::input("polytope needs points in dimension >= 2"));
        }
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::input("polytope points have mixed dimensions"));
        }
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::input("polytope points must be finite"));
        }
        let pts: Vec<DVector<f64>> = points.iter().map(|p| DVector::from_column_slice(p)).collect();
        let raw = hull::facets(&pts)?;
        let mut facets = Vec::with_capacity(raw.len());
        let mut extreme = vec![false; pts.len()];
        for f in &raw {
            let members: Vec<DVector<f64>> = f.members.iter().map(|&i| pts[i].clone()).collect();
            for &i in &f.members {
                extreme[i] = true;
            }
            let (measure, centroid) = facet_measure(&members, &f.normal)?;
            facets.push(Facet {
                normal: f.normal.iter().copied().collect(),
                offset: f.offset,
                measure,
                centroid: centroid.iter().copied().collect(),
            });
        }
        let vertices = points
            .iter()
            .zip(&extreme)
            .filter(|(_, &e)| e)
            .map(|(p, _)| p.clone())
            .collect();
        Self::from_parts(dim, vertices, facets)
    }

    /// The cube [-r, r]^n, built directly for any n.
    pub fn cube(dim: usize, half_width: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::input("cube needs n >= 2"));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::input("cube half-width must be positive"));
        }
        let vertices = (0..1usize << dim)
            .map(|mask| {
                (0..dim)
                    .map(|k| if mask >> k & 1 == 1 { half_width } else { -half_width })
                    .collect()
            })
            .collect();
        let measure = (2.0 * half_width).powi(dim as i32 - 1);
        let mut facets = Vec::with_capacity(2 * dim);
        for k in 0..dim {
            for sign in [1.0, -1.0] {
                let mut normal = vec![0.0; dim];
                normal[k] = sign;
                let centroid = normal.iter().map(|x| x * half_width).collect();
                facets.push(Facet { normal, offset: half_width, measure, centroid });
            }
        }
        Self::from_parts(dim, vertices, facets)
    }

    /// The simplex with the given n+1 vertices.
    pub fn simplex(vertices: &[Vec<f64>]) -> Result<Self> {
        let n = vertices.first().map(Vec::len).unwrap_or(0);
        if vertices.len() != n + 1 {
            return Err(Error::input(format!("a simplex in R^{n} needs {} vertices", n + 1)));
        }
        Self::from_points(vertices)
    }

    /// Regular k-gon inscribed in the circle of radius r, first vertex on
    /// the positive x-axis rotated by `phase`.
    pub fn regular_polygon(k: usize, radius: f64, phase: f64) -> Result<Self> {
        if k < 3 {
            return Err(Error::input("a polygon needs at least 3 vertices"));
        }
        let pts: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                let t = phase + 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                vec![radius * t.cos(), radius * t.sin()]
            })
            .collect();
        Self::from_points(&pts)
    }

    fn from_parts(dim: usize, vertices: Vec<Vec<f64>>, facets: Vec<Facet>) -> Result<Self> {
        if let Some(f) = facets.iter().find(|f| !(f.offset > 0.0)) {
            return Err(Error::geometry(format!(
                "origin is not interior: facet with normal {:?} has support {:e}",
                f.normal, f.offset
            )));
        }
        Ok(Polytope { dim, vertices, facets })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn support(&self, x: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| super::dot(v, x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn gauge(&self, y: &[f64]) -> f64 {
        self.facets
            .iter()
            .map(|f| super::dot(&f.normal, y) / f.offset)
            .fold(0.0, f64::max)
    }

    pub fn radial(&self, theta: &[f64]) -> Result<f64> {
        let g = self.gauge(theta);
        if g > 0.0 {
            Ok(1.0 / g)
        } else {
            Err(Error::geometry(format!("ray {theta:?} meets no facet")))
        }
    }

    /// Gradient of the gauge at direction θ, i.e. ν_F / h_K(ν_F) for the
    /// facet hit by the ray. The flag is set when θ sits on a ridge and the
    /// gradient was taken at a jittered direction instead.
    pub fn gauge_gradient(&self, theta: &[f64]) -> (Vec<f64>, bool) {
        let scores: Vec<f64> =
            self.facets.iter().map(|f| super::dot(&f.normal, theta) / f.offset).collect();
        let (best, top) = argmax(&scores);
        let tied = scores
            .iter()
            .enumerate()
            .any(|(i, &s)| i != best && top - s <= RIDGE_TIE * top.abs());
        let index = if tied {
            let jittered: Vec<f64> = theta
                .iter()
                .enumerate()
                .map(|(i, t)| t + RIDGE_TIE * jitter_direction(i))
                .collect();
            let scores: Vec<f64> =
                self.facets.iter().map(|f| super::dot(&f.normal, &jittered) / f.offset).collect();
            argmax(&scores).0
        } else {
            best
        };
        let f = &self.facets[index];
        (f.normal.iter().map(|x| x / f.offset).collect(), tied)
    }

    /// Σ_F h_K(ν_F)·|F| / n.
    pub fn volume(&self) -> f64 {
        let terms: Vec<f64> = self.facets.iter().map(|f| f.offset * f.measure).collect();
        crate::special::pairwise_sum(&terms) / self.dim as f64
    }

    pub fn boundary(&self) -> BoundarySet {
        let elements = self
            .facets
            .iter()
            .map(|f| BoundaryElement {
                point: DVector::from_column_slice(&f.centroid),
                normal: DVector::from_column_slice(&f.normal),
                weight: f.measure,
                cosine: f.offset,
            })
            .collect();
        BoundarySet { elements, coarse: None, exact: true, method: "facet-exact".into() }
    }

    /// φK. Facet data transform exactly: ν' ∝ φ^{-T}ν, and the facet measure
    /// scales by |det φ|·|φ^{-T}ν|.
    pub fn linear_image(&self, map: &LinearMap) -> Result<Self> {
        if map.dim() != self.dim {
            return Err(Error::input("linear map dimension does not match the body"));
        }
        let vertices = self
            .vertices
            .iter()
            .map(|v| map.apply(&DVector::from_column_slice(v)).iter().copied().collect())
            .collect();
        let facets = self
            .facets
            .iter()
            .map(|f| {
                let raw = map.apply_inverse_transpose(&DVector::from_column_slice(&f.normal));
                let len = raw.norm();
                let centroid = map.apply(&DVector::from_column_slice(&f.centroid));
                let normal = raw / len;
                Facet {
                    offset: normal.dot(&centroid),
                    measure: f.measure * map.abs_det() * len,
                    normal: normal.iter().copied().collect(),
                    centroid: centroid.iter().copied().collect(),
                }
            })
            .collect();
        Self::from_parts(self.dim, vertices, facets)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        self.linear_image(&LinearMap::scaling(self.dim, factor)?)
    }
}

fn argmax(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc })
}

/// Fixed, generic perturbation direction used to break ridge ties.
pub(crate) fn jitter_direction(i: usize) -> f64 {
    [0.577_215_664_9, 0.316_227_766, 0.141_421_356, 0.271_828_182][i % 4]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn cube_radial_and_volume() {
        let c3 = Polytope::cube(3, 1.0).unwrap();
        assert!((c3.radial(&[1.0, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((c3.volume() - 8.0).abs() < 1e-12);
        let c2 = Polytope::cube(2, 1.0).unwrap();
        let r = c2.radial(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        let b = c2.boundary();
        assert_eq!(b.elements.len(), 4);
        assert!(b.elements.iter().all(|e| e.weight == 2.0 && e.cosine == 1.0));
    }

    #[test]
    fn hull_matches_direct_cube() {
        let direct = Polytope::cube(3, 0.5).unwrap();
        let hull = Polytope::from_points(direct.vertices()).unwrap();
        assert_eq!(hull.facets().len(), 6);
        assert!((hull.volume() - direct.volume()).abs() < 1e-12);
    }

    #[test]
    fn triangle_area_matches_shoelace() {
        let tri = Polytope::from_points(&[vec![2.0, 0.0], vec![0.0, 2.0], vec![-1.0, -1.0]]).unwrap();
        let b = tri.boundary();
        assert_eq!(b.elements.len(), 3);
        // shoelace: ((2·2 − 0) + (0·(−1) − 2·(−1)) + ((−1)·0 − (−1)·2)) / 2
        assert!((b.volume(2) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn origin_outside_is_rejected() {
        let err = Polytope::from_points(&[vec![1.0, 0.0], vec![2.0, 0.0], vec![1.0, 1.0]]);
        assert!(matches!(err, Err(Error::Geometry(_))));
    }

    #[test]
    fn rotation_preserves_volume() {
        let cube = Polytope::cube(2, 1.0).unwrap();
        let rot = LinearMap::plane_rotation(2, 0, 1, std::f64::consts::PI / 6.0).unwrap();
        let image = cube.linear_image(&rot).unwrap();
        assert!((image.volume() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn linear_image_facets_match_rebuilt_hull() {
        let cube = Polytope::cube(3, 1.0).unwrap();
        let map = LinearMap::from_rows(3, &[1.0, 0.3, 0.0, 0.2, 1.5, 0.1, 0.0, -0.4, 0.8]).unwrap();
        let image = cube.linear_image(&map).unwrap();
        let rebuilt = Polytope::from_points(image.vertices()).unwrap();
        assert!((image.volume() - rebuilt.volume()).abs() < 1e-10);
        assert!((image.volume() - 8.0 * map.abs_det()).abs() < 1e-10);
        let theta = [0.48, -0.6, 0.64];
        assert!((image.radial(&theta).unwrap() - rebuilt.radial(&theta).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn ridge_directions_are_flagged() {
        let cube = Polytope::cube(2, 1.0).unwrap();
        let (_, tied) = cube.gauge_gradient(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        assert!(tied);
        let (g, tied) = cube.gauge_gradient(&[0.8, 0.6]);
        assert!(!tied);
        assert_eq!(g, vec![1.0, 0.0]);
    }
}
