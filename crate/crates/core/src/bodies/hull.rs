//! Brute-force facet enumeration for small point sets in low dimension.
//!
//! Every d-subset of points spans a candidate hyperplane; those with all
//! points on one side are facets. Facet measures and centroids come from the
//! same procedure one dimension down. This is O(N^{d+1}) and intended for the
//! tens of points used by fixtures.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest point set accepted, to keep the brute force bounded.
pub const MAX_HULL_POINTS: usize = 96;

#[derive(Clone, Debug)]
pub(crate) struct RawFacet {
    pub normal: DVector<f64>,
    pub offset: f64,
    pub members: Vec<usize>,
}

fn centroid(points: &[DVector<f64>]) -> DVector<f64> {
    let mut c = DVector::zeros(points[0].len());
    for p in points {
        c += p;
    }
    c / points.len() as f64
}

fn spread(points: &[DVector<f64>], center: &DVector<f64>) -> f64 {
    points.iter().map(|p| (p - center).norm()).fold(0.0, f64::max)
}

/// Affine rank of a point set (0 for a single point).
pub(crate) fn affine_rank(points: &[DVector<f64>]) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let d = points[0].len();
    let c = centroid(points);
    let scale = spread(points, &c);
    if scale == 0.0 {
        return 0;
    }
    let m = DMatrix::from_fn(points.len(), d, |i, j| (points[i][j] - c[j]) / scale);
    let sv = m.singular_values();
    sv.iter().filter(|&&s| s > 1e-9).count()
}

/// Generalized cross product of d-1 vectors in R^d.
fn orthogonal_complement(rows: &[DVector<f64>], d: usize) -> DVector<f64> {
    if d == 1 {
        return DVector::from_element(1, 1.0);
    }
    let mut normal = DVector::zeros(d);
    for j in 0..d {
        let minor = DMatrix::from_fn(d - 1, d - 1, |r, c| {
            let col = if c < j { c } else { c + 1 };
            rows[r][col]
        });
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        normal[j] = sign * minor.determinant();
    }
    normal
}

/// Outer facets of the convex hull of a full-dimensional point set.
pub(crate) fn facets(points: &[DVector<f64>]) -> Result<Vec<RawFacet>> {
    let d = points.first().map(|p| p.len()).unwrap_or(0);
    if d < 2 {
        return Err(Error::geometry("facet enumeration needs dimension >= 2"));
    }
    if points.len() > MAX_HULL_POINTS {
        return Err(Error::input(format!(
            "hull of {} points exceeds the supported {MAX_HULL_POINTS}",
            points.len()
        )));
    }
    if affine_rank(points) < d {
        return Err(Error::geometry(format!("points do not span R^{d}")));
    }
    let interior = centroid(points);
    let scale = spread(points, &interior);
    let eps = 1e-10 * scale;
    let mut out: Vec<RawFacet> = Vec::new();
    for combo in (0..points.len()).combinations(d) {
        let base = &points[combo[0]];
        let rows: Vec<DVector<f64>> = combo[1..].iter().map(|&i| &points[i] - base).collect();
        let mut normal = orthogonal_complement(&rows, d);
        let size: f64 = rows.iter().map(|r| r.norm()).product();
        let len = normal.norm();
        if len <= 1e-10 * size.max(f64::MIN_POSITIVE) {
            continue;
        }
        normal /= len;
        if normal.dot(&(base - &interior)) < 0.0 {
            normal = -normal;
        }
        if out.iter().any(|f| (&f.normal - &normal).amax() < 1e-8) {
            continue;
        }
        let offset = normal.dot(base);
        if points.iter().all(|p| normal.dot(p) <= offset + eps) {
            let members = (0..points.len())
                .filter(|&i| (normal.dot(&points[i]) - offset).abs() <= eps)
                .collect();
            out.push(RawFacet { normal, offset, members });
        }
    }
    Ok(out)
}

/// Orthonormal basis of the hyperplane orthogonal to a unit vector.
pub(crate) fn complement_basis(normal: &DVector<f64>) -> Vec<DVector<f64>> {
    let d = normal.len();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(d - 1);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| normal[a].abs().total_cmp(&normal[b].abs()));
    for &k in &order {
        if basis.len() == d - 1 {
            break;
        }
        let mut v = DVector::zeros(d);
        v[k] = 1.0;
        v -= normal * normal[k];
        for b in &basis {
            let proj = b.dot(&v);
            v -= b * proj;
        }
        let len = v.norm();
        if len > 1e-8 {
            basis.push(v / len);
        }
    }
    basis
}

/// Volume (k-measure) and centroid of the convex hull of points in R^k.
pub(crate) fn measure_and_centroid(points: &[DVector<f64>]) -> Result<(f64, DVector<f64>)> {
    let k = points.first().map(|p| p.len()).ok_or_else(|| Error::geometry("empty point set"))?;
    if k == 1 {
        let (lo, hi) = points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[0]), hi.max(p[0])));
        return Ok((hi - lo, DVector::from_element(1, 0.5 * (lo + hi))));
    }
    let inner = centroid(points);
    let mut volume = 0.0;
    let mut moment = DVector::zeros(k);
    for facet in facets(points)? {
        let members: Vec<DVector<f64>> = facet.members.iter().map(|&i| points[i].clone()).collect();
        let (area, center) = facet_measure(&members, &facet.normal)?;
        let height = facet.offset - facet.normal.dot(&inner);
        let cone = height * area / k as f64;
        volume += cone;
        moment += (&inner + (&center - &inner) * (k as f64 / (k as f64 + 1.0))) * cone;
    }
    if volume <= 0.0 {
        return Err(Error::geometry("degenerate hull volume"));
    }
    Ok((volume, moment / volume))
}

/// (k-1)-measure and centroid of a facet given its member points.
pub(crate) fn facet_measure(members: &[DVector<f64>], normal: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
    let basis = complement_basis(normal);
    let origin = &members[0];
    let local: Vec<DVector<f64>> = members
        .iter()
        .map(|p| {
            let rel = p - origin;
            DVector::from_iterator(basis.len(), basis.iter().map(|b| b.dot(&rel)))
        })
        .collect();
    let (measure, c) = measure_and_centroid(&local)?;
    let mut center = origin.clone();
    for (b, ci) in basis.iter().zip(c.iter()) {
        center += b * *ci;
    }
    Ok((measure, center))
}
