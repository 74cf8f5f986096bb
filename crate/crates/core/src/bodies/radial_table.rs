//! Star bodies given by radial samples on a spherical grid. The boundary is
//! the piecewise-flat surface through the sampled points ρ(θ_i)θ_i: a
//! polygon for n = 2 (uniform angles) and a triangulated surface over a
//! subdivided icosahedron for n = 3.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DVector, Matrix3, Vector3};

use super::polytope::{jitter_direction, RIDGE_TIE};
use super::{BoundaryElement, BoundarySet, LinearMap};
use crate::error::{Error, Result};

const MAX_LEVEL_2D: u32 = 16;
const MAX_LEVEL_3D: u32 = 6;

#[derive(Clone, Debug, PartialEq)]
struct Face {
    normal: Vec<f64>,
    offset: f64,
    area: f64,
    centroid: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialTable {
    dim: usize,
    level: u32,
    directions: Vec<Vec<f64>>,
    values: Vec<f64>,
    /// Triangles per subdivision level; children of face f at level l are
    /// faces 4f..4f+4 at level l+1. For n = 2 only the last entry is used.
    hierarchy: Vec<Vec<[usize; 3]>>,
    faces: Vec<Face>,
}

impl RadialTable {
    /// Number of grid directions at a given level.
    pub fn grid_size(dim: usize, level: u32) -> Result<usize> {
        match dim {
            2 if level <= MAX_LEVEL_2D => Ok(16 << level),
            3 if level <= MAX_LEVEL_3D => Ok(10 * 4usize.pow(level) + 2),
            2 | 3 => Err(Error::input(format!("radial table level {level} is too fine"))),
            _ => Err(Error::input(format!("radial tables support n in {{2, 3}}, got {dim}"))),
        }
    }

    /// The grid directions, in the order expected by [`from_values`](Self::from_values).
    pub fn grid(dim: usize, level: u32) -> Result<Vec<Vec<f64>>> {
        Self::grid_size(dim, level)?;
        Ok(match dim {
            2 => circle_grid(level),
            _ => icosphere(level).0,
        })
    }

    /// Samples ρ at the grid directions.
    pub fn sample<F>(dim: usize, level: u32, rho: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<f64>,
    {
        let grid = Self::grid(dim, level)?;
        let values = grid.iter().map(|t| rho(t)).collect::<Result<Vec<_>>>()?;
        Self::from_values(dim, level, values)
    }

    pub fn from_values(dim: usize, level: u32, values: Vec<f64>) -> Result<Self> {
        let expected = Self::grid_size(dim, level)?;
        if values.len() != expected {
            return Err(Error::input(format!(
                "radial table at level {level} needs {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::input(format!("radial values must be finite and positive, got {v}")));
        }
        let (directions, hierarchy) = match dim {
            2 => {
                let dirs = circle_grid(level);
                let k = dirs.len();
                let edges = (0..k).map(|i| [i, (i + 1) % k, usize::MAX]).collect();
                (dirs, vec![edges])
            }
            _ => icosphere(level),
        };
        let points: Vec<Vec<f64>> =
            directions.iter().zip(&values).map(|(d, r)| d.iter().map(|x| x * r).collect()).collect();
        let last = hierarchy.last().expect("nonempty hierarchy");
        let faces = last
            .iter()
            .map(|f| if dim == 2 { edge_face(&points[f[0]], &points[f[1]]) } else { triangle_face(&points, f) })
            .collect::<Result<Vec<_>>>()?;
        Ok(RadialTable { dim, level, directions, values, hierarchy, faces })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Index of the finest face whose cone contains y, and whether y sits
    /// within the tie tolerance of the cone's boundary.
    fn locate(&self, y: &[f64]) -> (usize, bool) {
        if self.dim == 2 {
            let k = self.directions.len();
            let step = 2.0 * PI / k as f64;
            let angle = y[1].atan2(y[0]).rem_euclid(2.0 * PI);
            let pos = angle / step;
            let index = (pos.floor() as usize).min(k - 1);
            let frac = pos - pos.floor();
            return (index, frac <= RIDGE_TIE || 1.0 - frac <= RIDGE_TIE);
        }
        let y = Vector3::new(y[0], y[1], y[2]);
        let mut best = (0usize, f64::NEG_INFINITY);
        for f in 0..self.hierarchy[0].len() {
            let score = self.cone_score(0, f, &y);
            if score > best.1 {
                best = (f, score);
            }
        }
        for level in 1..self.hierarchy.len() {
            let parent = best.0;
            best = (4 * parent, f64::NEG_INFINITY);
            for f in 4 * parent..4 * parent + 4 {
                let score = self.cone_score(level, f, &y);
                if score > best.1 {
                    best = (f, score);
                }
            }
        }
        (best.0, best.1 <= RIDGE_TIE)
    }

    /// Smallest normalized barycentric coordinate of y in the cone of a face;
    /// non-negative iff y lies in the cone.
    fn cone_score(&self, level: usize, face: usize, y: &Vector3<f64>) -> f64 {
        let [a, b, c] = self.hierarchy[level][face];
        let v = |i: usize| Vector3::from_column_slice(&self.directions[i]);
        let (va, vb, vc) = (v(a), v(b), v(c));
        let total = Matrix3::from_columns(&[va, vb, vc]).determinant();
        let l0 = Matrix3::from_columns(&[*y, vb, vc]).determinant();
        let l1 = Matrix3::from_columns(&[va, *y, vc]).determinant();
        let l2 = Matrix3::from_columns(&[va, vb, *y]).determinant();
        let sum = l0 + l1 + l2;
        if sum <= 0.0 || total <= 0.0 {
            return f64::NEG_INFINITY;
        }
        l0.min(l1).min(l2) / sum
    }

    fn face_for(&self, y: &[f64]) -> (&Face, bool) {
        let (index, tied) = self.locate(y);
        if !tied {
            return (&self.faces[index], false);
        }
        let jittered: Vec<f64> =
            y.iter().enumerate().map(|(i, t)| t + RIDGE_TIE * jitter_direction(i)).collect();
        (&self.faces[self.locate(&jittered).0], true)
    }

    /// Gauge of the interpolated body: ν_F·y / c_F on the face hit by y.
    pub fn gauge(&self, y: &[f64]) -> f64 {
        let (index, _) = self.locate(y);
        let f = &self.faces[index];
        super::dot(&f.normal, y) / f.offset
    }

    pub fn gauge_gradient(&self, theta: &[f64]) -> (Vec<f64>, bool) {
        let (f, tied) = self.face_for(theta);
        (f.normal.iter().map(|x| x / f.offset).collect(), tied)
    }

    pub fn volume(&self) -> f64 {
        let terms: Vec<f64> = self.faces.iter().map(|f| f.offset * f.area).collect();
        crate::special::pairwise_sum(&terms) / self.dim as f64
    }

    pub fn boundary(&self) -> Result<BoundarySet> {
        let elements = self
            .faces
            .iter()
            .map(|f| BoundaryElement {
                point: DVector::from_column_slice(&f.centroid),
                normal: DVector::from_column_slice(&f.normal),
                weight: f.area,
                cosine: f.offset,
            })
            .collect();
        Ok(BoundarySet { elements, coarse: None, exact: true, method: "facet-exact (radial table)".into() })
    }

    /// φK, re-sampled on the same grid from the law
    /// ρ_{φK}(θ) = ρ_K(φ^{-1}θ / |φ^{-1}θ|) / |φ^{-1}θ|.
    pub fn linear_image(&self, map: &LinearMap) -> Result<Self> {
        if map.dim() != self.dim {
            return Err(Error::input("linear map dimension does not match the body"));
        }
        Self::sample(self.dim, self.level, |theta| {
            let pre = map.apply_inverse(&DVector::from_column_slice(theta));
            Ok(1.0 / self.gauge(pre.as_slice()))
        })
    }
}

fn circle_grid(level: u32) -> Vec<Vec<f64>> {
    let k = 16usize << level;
    (0..k)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / k as f64;
            vec![t.cos(), t.sin()]
        })
        .collect()
}

fn edge_face(a: &[f64], b: &[f64]) -> Result<Face> {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len = (dx * dx + dy * dy).sqrt();
    let normal = vec![dy / len, -dx / len];
    let offset = super::dot(&normal, a);
    if !(offset > 0.0) {
        return Err(Error::geometry(format!("interpolated boundary has z·ν = {offset:e} <= 0")));
    }
    Ok(Face { normal, offset, area: len, centroid: vec![0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])] })
}

fn triangle_face(points: &[Vec<f64>], f: &[usize; 3]) -> Result<Face> {
    let p = |i: usize| Vector3::from_column_slice(&points[f[i]]);
    let (a, b, c) = (p(0), p(1), p(2));
    let cross = (b - a).cross(&(c - a));
    let twice_area = cross.norm();
    let normal = cross / twice_area;
    let offset = normal.dot(&a);
    if !(offset > 0.0) {
        return Err(Error::geometry(format!("interpolated boundary has z·ν = {offset:e} <= 0")));
    }
    let centroid = (a + b + c) / 3.0;
    Ok(Face {
        normal: normal.iter().copied().collect(),
        offset,
        area: 0.5 * twice_area,
        centroid: centroid.iter().copied().collect(),
    })
}

/// Unit directions and per-level triangles of the subdivided icosahedron,
/// every triangle oriented with det(v0, v1, v2) > 0.
fn icosphere(level: u32) -> (Vec<Vec<f64>>, Vec<Vec<[usize; 3]>>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, t, 0.0], [1.0, t, 0.0], [-1.0, -t, 0.0], [1.0, -t, 0.0],
        [0.0, -1.0, t], [0.0, 1.0, t], [0.0, -1.0, -t], [0.0, 1.0, -t],
        [t, 0.0, -1.0], [t, 0.0, 1.0], [-t, 0.0, -1.0], [-t, 0.0, 1.0],
    ];
    let mut dirs: Vec<Vector3<f64>> = raw.iter().map(|v| Vector3::from(*v).normalize()).collect();
    let base: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    let orient = |dirs: &[Vector3<f64>], f: [usize; 3]| {
        let det = Matrix3::from_columns(&[dirs[f[0]], dirs[f[1]], dirs[f[2]]]).determinant();
        if det < 0.0 { [f[0], f[2], f[1]] } else { f }
    };
    let base: Vec<[usize; 3]> = base.into_iter().map(|f| orient(&dirs, f)).collect();
    let mut levels = vec![base];
    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, dirs: &mut Vec<Vector3<f64>>| {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                dirs.push((dirs[a] + dirs[b]).normalize());
                dirs.len() - 1
            })
        };
        let prev = levels.last().expect("nonempty");
        let mut next = Vec::with_capacity(prev.len() * 4);
        for &[a, b, c] in prev {
            let ab = mid(a, b, &mut dirs);
            let bc = mid(b, c, &mut dirs);
            let ca = mid(c, a, &mut dirs);
            next.push([a, ab, ca]);
            next.push([ab, b, bc]);
            next.push([ca, bc, c]);
            next.push([ab, bc, ca]);
        }
        levels.push(next);
    }
    let dirs = dirs.into_iter().map(|v| v.iter().copied().collect()).collect();
    (dirs, levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ball_volume;

    #[test]
    fn grid_sizes() {
        for level in 0..=3 {
            assert_eq!(RadialTable::grid(3, level).unwrap().len(), RadialTable::grid_size(3, level).unwrap());
            assert_eq!(RadialTable::grid(2, level).unwrap().len(), 16 << level);
        }
        assert!(RadialTable::grid(4, 0).is_err());
    }

    #[test]
    fn sphere_table_converges_to_ball() {
        let mut prev = f64::INFINITY;
        for level in 0..=4 {
            let t = RadialTable::sample(3, level, |_| Ok(1.0)).unwrap();
            let gap = ball_volume(3) - t.volume();
            assert!(gap > 0.0 && gap < prev);
            prev = gap;
        }
        assert!(prev < 2e-2, "{prev}");
    }

    #[test]
    fn interpolation_reproduces_samples_and_locates_faces() {
        let rho = |t: &[f64]| Ok(1.0 + 0.3 * t[0] * t[1] + 0.2 * t[2]);
        let t = RadialTable::sample(3, 2, rho).unwrap();
        for (dir, v) in RadialTable::grid(3, 2).unwrap().iter().zip(t.values()) {
            assert!((1.0 / t.gauge(dir) - v).abs() < 1e-12);
        }
        let theta = [0.36, -0.48, 0.8];
        let g = t.gauge(&theta);
        let (grad, _) = t.gauge_gradient(&theta);
        assert!((super::super::dot(&grad, &theta) - g).abs() < 1e-12);
        assert!(((1.0 / g) - rho(&theta).unwrap()).abs() < 0.02);
    }

    #[test]
    fn disk_table_volume() {
        let t = RadialTable::sample(2, 3, |_| Ok(2.0)).unwrap();
        let k = 16.0 * 8.0;
        let polygon = 0.5 * k * 4.0 * (2.0 * PI / k).sin();
        assert!((t.volume() - polygon).abs() < 1e-10);
        let b = t.boundary().unwrap();
        assert!((b.volume(2) - polygon).abs() < 1e-10);
    }

    #[test]
    fn linear_image_is_resampled() {
        let t = RadialTable::sample(2, 4, |_| Ok(1.0)).unwrap();
        let map = LinearMap::scaling(2, 3.0).unwrap();
        let image = t.linear_image(&map).unwrap();
        assert!(image.values().iter().all(|v| (v - 3.0).abs() < 1e-12));
    }

    #[test]
    fn bad_values_are_rejected() {
        let n = RadialTable::grid_size(2, 0).unwrap();
        let mut values = vec![1.0; n];
        values[3] = 0.0;
        assert!(matches!(RadialTable::from_values(2, 0, values), Err(Error::Input(_))));
    }
}
