//! Seeded random fixtures: bodies K, bodies Q and linear maps.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bodies::{Polytope, QBody};
use crate::config::BodySpec;

/// Bodies whose inradius about the origin falls below this are redrawn.
pub const MIN_RADIAL: f64 = 0.05;

/// Independent stream for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng
}

fn gaussian_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Convex hull of N(0, I) samples: 8–16 points for n = 2, 12–24 for n = 3
/// (and 20–32 for n = 4), redrawn until the origin is interior with
/// inradius at least [`MIN_RADIAL`].
pub fn random_polytope(rng: &mut ChaCha8Rng, n: usize) -> BodySpec {
    let (lo, hi) = match n {
        2 => (8, 16),
        3 => (12, 24),
        _ => (20, 32),
    };
    loop {
        let count = rng.random_range(lo..=hi);
        let pts: Vec<Vec<f64>> = (0..count).map(|_| gaussian_point(rng, n)).collect();
        if let Ok(poly) = Polytope::from_points(&pts) {
            let inradius = poly.facets().iter().map(|f| f.offset).fold(f64::INFINITY, f64::min);
            if inradius >= MIN_RADIAL {
                return BodySpec::Polytope { vertices: poly.vertices().to_vec() };
            }
        }
    }
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    g.qr().q()
}

/// A = O·diag(σ)·Oᵀ with random orthogonal O and σ log-uniform in [0.5, 2].
pub fn random_ellipsoid(rng: &mut ChaCha8Rng, n: usize) -> BodySpec {
    let o = random_orthogonal(rng, n);
    let sigma = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| log_uniform(rng, 0.5, 2.0)));
    let a = &o * sigma * o.transpose();
    let a = (&a + a.transpose()) * 0.5;
    BodySpec::Ellipsoid { matrix: (0..n).map(|i| (0..n).map(|j| a[(i, j)]).collect()).collect() }
}

pub fn random_body(rng: &mut ChaCha8Rng, n: usize) -> BodySpec {
    if rng.random_bool(0.5) {
        random_polytope(rng, n)
    } else {
        random_ellipsoid(rng, n)
    }
}

/// Segment [a, b] with |a|, b log-uniform in [0.05, 2]; one endpoint is at
/// the origin with probability 0.15.
pub fn random_segment(rng: &mut ChaCha8Rng) -> QBody {
    let mut a = -log_uniform(rng, 0.05, 2.0);
    let mut b = log_uniform(rng, 0.05, 2.0);
    if rng.random_bool(0.15) {
        if rng.random_bool(0.5) {
            a = 0.0;
        } else {
            b = 0.0;
        }
    }
    QBody::segment(a, b).expect("valid by construction")
}

/// Random simplex in R^m containing the origin; with probability 0.15 the
/// origin is one of its vertices.
pub fn random_simplex(rng: &mut ChaCha8Rng, m: usize) -> QBody {
    loop {
        let pts: Vec<Vec<f64>> = (0..=m).map(|_| gaussian_point(rng, m)).collect();
        let shift: Vec<f64> = if rng.random_bool(0.15) {
            pts[0].clone()
        } else {
            let w: Vec<f64> = (0..=m).map(|_| rng.random_range(0.2..1.0)).collect();
            let total: f64 = w.iter().sum();
            (0..m).map(|j| pts.iter().zip(&w).map(|(p, wi)| p[j] * wi).sum::<f64>() / total).collect()
        };
        let verts: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().zip(&shift).map(|(x, s)| x - s).collect()).collect();
        if let Ok(q) = QBody::simplex(verts) {
            return q;
        }
    }
}

/// Axis box with lo_i ∈ [-1, 0], hi_i ∈ [0, 1] (nondegenerate).
pub fn random_box(rng: &mut ChaCha8Rng, m: usize) -> QBody {
    let lo = (0..m).map(|_| -rng.random_range(0.0..1.0)).collect::<Vec<f64>>();
    let hi = lo.iter().map(|l| if *l > -0.05 { rng.random_range(0.1..1.0) } else { rng.random_range(0.0..1.0) }).collect();
    QBody::axis_box(lo, hi).expect("valid by construction")
}

pub fn random_q(rng: &mut ChaCha8Rng, m: usize) -> QBody {
    if m == 1 {
        return random_segment(rng);
    }
    if rng.random_bool(0.5) {
        random_simplex(rng, m)
    } else {
        random_box(rng, m)
    }
}

/// I + 0.4·G with Gaussian G, redrawn until the condition number is <= 8.
pub fn random_map(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    loop {
        let m = DMatrix::from_fn(n, n, |i, j| {
            let g: f64 = rng.sample(StandardNormal);
            if i == j { 1.0 + 0.4 * g } else { 0.4 * g }
        });
        let sv = m.singular_values();
        let cond = sv.max() / sv.min();
        if cond.is_finite() && cond <= 8.0 {
            return (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
        }
    }
}

/// A random nonzero n×m matrix (column-major), not normalized.
pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<f64> {
    gaussian_point(rng, n * m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_reproducible_and_valid() {
        for trial in 0..5 {
            let mut r1 = trial_rng(7, trial);
            let mut r2 = trial_rng(7, trial);
            for n in [2, 3] {
                let a = random_body(&mut r1, n);
                assert_eq!(a, random_body(&mut r2, n));
                let k = a.build().unwrap();
                assert_eq!(k.dim(), n);
            }
            for m in [1, 2, 3] {
                let q = random_q(&mut r1, m);
                assert_eq!(q, random_q(&mut r2, m));
                q.validate().unwrap();
            }
        }
    }

    #[test]
    fn polytope_inradius_floor() {
        let mut rng = trial_rng(1, 0);
        for _ in 0..10 {
            let BodySpec::Polytope { vertices } = random_polytope(&mut rng, 3) else { unreachable!() };
            let p = Polytope::from_points(&vertices).unwrap();
            assert!(p.facets().iter().all(|f| f.offset >= MIN_RADIAL));
        }
    }
}
