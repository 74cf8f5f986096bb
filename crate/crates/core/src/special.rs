//! Special functions and 1-D Gauss-Legendre nodes.

use std::f64::consts::PI;

/// Γ(k/2) for a positive integer k, by the exact half-integer recursion.
pub fn gamma_half(k: usize) -> f64 {
    assert!(k > 0, "gamma_half needs k >= 1");
    let (mut value, mut x) = if k.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = k as f64 / 2.0;
    while x < target {
        value *= x;
        x += 1.0;
    }
    value
}

/// Volume ω_n of the unit Euclidean ball in R^n.
pub fn ball_volume(n: usize) -> f64 {
    PI.powf(n as f64 / 2.0) / gamma_half(n + 2)
}

/// Surface measure of the unit sphere S^{d-1} in R^d.
pub fn sphere_measure(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d)
}

/// Gauss-Legendre nodes and weights on [-1, 1], ascending.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=order {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if order == 0 {
        return (1.0, 0.0);
    }
    let n = order as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed-shape pairwise summation: the result depends only on the input order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn half_integer_gamma() {
        assert_eq!(gamma_half(2), 1.0);
        assert_eq!(gamma_half(4), 1.0);
        assert_eq!(gamma_half(10), 24.0);
        assert_relative_eq!(gamma_half(1), PI.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(gamma_half(5), 0.75 * PI.sqrt(), max_relative = 1e-15);
        for k in 1..30 {
            let lanczos = statrs::function::gamma::gamma(k as f64 / 2.0);
            assert_relative_eq!(gamma_half(k), lanczos, max_relative = 1e-10);
        }
    }

    #[test]
    fn ball_volumes() {
        assert_relative_eq!(ball_volume(2), PI, max_relative = 1e-13);
        assert_relative_eq!(ball_volume(3), 4.0 * PI / 3.0, max_relative = 1e-13);
        assert_relative_eq!(ball_volume(4), PI * PI / 2.0, max_relative = 1e-13);
        assert_relative_eq!(sphere_measure(4), 2.0 * PI * PI, max_relative = 1e-13);
        for n in 2..8 {
            assert_relative_eq!(sphere_measure(n), n as f64 * ball_volume(n), max_relative = 1e-12);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for order in 1..40 {
            let (x, w) = gauss_legendre(order);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-13);
            // degree 2*order - 2 monomial (even)
            let deg = 2 * order - 2;
            let exact = 2.0 / (deg as f64 + 1.0);
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert_relative_eq!(approx, exact, max_relative = 1e-12);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        assert_relative_eq!(pairwise_sum(&v), v.iter().sum::<f64>(), epsilon = 1e-12);
    }
}
