//! Exact planar pipeline for Φ_{1,Q}(K) with n = 2, m = 1 and Q a segment.
//!
//! Π_{1,Q}K has support h(u) = Σ_E h_Q(ν_E·u)|E|, which is linear on each
//! angular sector between the directions orthogonal to the edge normals.
//! Those directions are therefore the edge normals of Π, and the polar
//! polygon has vertices w/h(w) at them. Everything here is computed from
//! the raw vertex list with its own hull routine.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const DEGENERATE: f64 = 1e-12;

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise convex hull (Andrew's monotone chain), collinear
/// points dropped.
pub fn monotone_chain(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

pub fn shoelace(polygon: &[[f64; 2]]) -> f64 {
    let k = polygon.len();
    (0..k)
        .map(|i| {
            let (a, b) = (polygon[i], polygon[(i + 1) % k]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        / 2.0
}

/// Exact Φ_{1,[a,b]}(K) = (2·Area(Π*))^{-1/2} for a convex polygon K with
/// the origin in its interior.
pub fn oracle_polygon_phi(vertices: &[Vec<f64>], a: f64, b: f64) -> Result<f64> {
    if vertices.iter().any(|v| v.len() != 2) {
        return Err(Error::input("polygon oracle needs planar vertices"));
    }
    if !(a <= 0.0 && 0.0 <= b && a < b) {
        return Err(Error::input("polygon oracle needs a segment with a <= 0 <= b"));
    }
    let pts: Vec<[f64; 2]> = vertices.iter().map(|v| [v[0], v[1]]).collect();
    let hull = monotone_chain(&pts);
    if hull.len() < 3 {
        return Err(Error::geometry("polygon oracle: fewer than 3 hull vertices"));
    }
    let k = hull.len();
    let mut edges = Vec::with_capacity(k);
    for i in 0..k {
        let (p, q) = (hull[i], hull[(i + 1) % k]);
        let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
        let len = (dx * dx + dy * dy).sqrt();
        if len < DEGENERATE {
            return Err(Error::geometry("polygon oracle: degenerate edge"));
        }
        let normal = [dy / len, -dx / len];
        if normal[0] * p[0] + normal[1] * p[1] <= DEGENERATE {
            return Err(Error::geometry("polygon oracle: origin is not interior"));
        }
        edges.push((normal, len));
    }
    let h_q = |t: f64| (a * t).max(b * t);
    let h_pi = |u: [f64; 2]| edges.iter().map(|(nu, len)| h_q(nu[0] * u[0] + nu[1] * u[1]) * len).sum::<f64>();

    let mut polar = Vec::with_capacity(2 * k);
    for (nu, _) in &edges {
        for w in [[-nu[1], nu[0]], [nu[1], -nu[0]]] {
            let h = h_pi(w);
            if h <= DEGENERATE {
                return Err(Error::geometry("polygon oracle: projection body support vanishes"));
            }
            polar.push([w[0] / h, w[1] / h]);
        }
    }
    let polar_hull = monotone_chain(&polar);
    let area = shoelace(&polar_hull);
    if !(area > 0.0) {
        return Err(Error::geometry("polygon oracle: degenerate polar polygon"));
    }
    Ok((2.0 * area).powf(-0.5))
}

/// Vertices of a regular k-gon of circumradius r, for oracle fixtures.
pub fn regular_polygon_vertices(k: usize, radius: f64, phase: f64) -> Vec<Vec<f64>> {
    (0..k)
        .map(|i| {
            let t = phase + 2.0 * PI * i as f64 / k as f64;
            vec![radius * t.cos(), radius * t.sin()]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_gives_one() {
        let square = vec![vec![-1.0, -1.0], vec![1.0, -1.0], vec![1.0, 1.0], vec![-1.0, 1.0]];
        assert!((oracle_polygon_phi(&square, -0.5, 0.5).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn regular_polygon_approaches_disk() {
        let phi = oracle_polygon_phi(&regular_polygon_vertices(64, 1.0, 0.0), -0.5, 0.5).unwrap();
        let disk = (2.0 / PI).sqrt();
        assert!((phi - disk).abs() < 5e-3 * disk);
    }

    #[test]
    fn rotation_invariance() {
        let base = vec![vec![2.0, 0.1], vec![-0.5, 1.3], vec![-1.2, -0.4], vec![0.3, -1.5]];
        let phi = oracle_polygon_phi(&base, -0.3, 0.9).unwrap();
        let (s, c) = 0.73f64.sin_cos();
        let rotated: Vec<Vec<f64>> = base.iter().map(|v| vec![c * v[0] - s * v[1], s * v[0] + c * v[1]]).collect();
        assert!((oracle_polygon_phi(&rotated, -0.3, 0.9).unwrap() - phi).abs() < 1e-10 * phi);
    }

    #[test]
    fn hull_drops_interior_points() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5], [0.5, 0.0]];
        let hull = monotone_chain(&pts);
        assert_eq!(hull.len(), 4);
        assert!((shoelace(&hull) - 1.0).abs() < 1e-15);
    }
}
