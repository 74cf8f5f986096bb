use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::special::{gauss_legendre, sphere_measure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Gauss,
    Qmc,
    Mc,
}

impl RuleKind {
    pub fn name(self) -> &'static str {
        match self {
            RuleKind::Gauss => "gauss",
            RuleKind::Qmc => "qmc",
            RuleKind::Mc => "mc",
        }
    }
}

/// Rule descriptor as it appears in configuration documents, e.g.
/// `{"kind":"gauss","level":4}` or `{"kind":"qmc","level":5,"seed":42}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, schemars::JsonSchema)]
pub struct RuleSpec {
    pub kind: RuleKind,
    pub level: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RuleSpec {
    pub fn gauss(level: u32) -> Self {
        RuleSpec { kind: RuleKind::Gauss, level, seed: None }
    }

    pub fn qmc(level: u32, seed: u64) -> Self {
        RuleSpec { kind: RuleKind::Qmc, level, seed: Some(seed) }
    }

    pub fn mc(level: u32, seed: u64) -> Self {
        RuleSpec { kind: RuleKind::Mc, level, seed: Some(seed) }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_level(mut self, level: u32) -> Self {
        self.level = level;
        self
    }
}

pub(super) fn stochastic_count(level: u32) -> usize {
    1000 * 4usize.pow(level)
}

/// Tensor Gauss rules on S^1, S^2, S^3.
///
/// S^1: Gauss-Legendre in angle on each quadrant. S^2: Gauss-Legendre in z = cos θ
/// times uniform azimuth. S^3: Gauss-Legendre in t = sin² η (which makes the
/// measure (1/2) dt dξ₁ dξ₂) times two uniform angles.
pub(super) fn product_gauss(dim: usize, level: u32) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    match dim {
        2 => {
            // Composite Gauss-Legendre on the four quadrants: integrands with
            // kinks on the coordinate axes stay spectrally accurate.
            let (xs, wx) = gauss_legendre(4usize << level);
            let half = PI / 4.0;
            for quadrant in 0..4 {
                let mid = half * (2 * quadrant + 1) as f64;
                for (x, w) in xs.iter().zip(&wx) {
                    let a = mid + half * x;
                    nodes.extend_from_slice(&[a.cos(), a.sin()]);
                    weights.push(half * w);
                }
            }
        }
        3 => {
            let nz = 2usize << level;
            let nphi = 4usize << level;
            let (zs, wz) = gauss_legendre(nz);
            let dphi = 2.0 * PI / nphi as f64;
            for (z, wz) in zs.iter().zip(&wz) {
                let r = (1.0 - z * z).sqrt();
                for k in 0..nphi {
                    let a = dphi * (k as f64 + 0.5);
                    nodes.extend_from_slice(&[r * a.cos(), r * a.sin(), *z]);
                    weights.push(wz * dphi);
                }
            }
        }
        4 => {
            let nt = 1usize << level;
            let nxi = 2usize << level;
            let (xs, wx) = gauss_legendre(nt);
            let dxi = 2.0 * PI / nxi as f64;
            for (x, wx) in xs.iter().zip(&wx) {
                let t = 0.5 * (x + 1.0);
                let (c, s) = ((1.0 - t).sqrt(), t.sqrt());
                let w = 0.25 * wx * dxi * dxi;
                for i in 0..nxi {
                    let a = dxi * (i as f64 + 0.5);
                    for j in 0..nxi {
                        let b = dxi * (j as f64 + 0.5);
                        nodes.extend_from_slice(&[c * a.cos(), c * a.sin(), s * b.cos(), s * b.sin()]);
                        weights.push(w);
                    }
                }
            }
        }
        _ => unreachable!("product Gauss rules exist for d in 2..=4"),
    }
    (nodes, weights)
}

/// Randomly shifted Halton points pushed to the sphere through the inverse
/// normal CDF; `replicates` independent shifts laid out contiguously.
pub(super) fn qmc(dim: usize, per_replicate: usize, replicates: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let bases = first_primes(dim);
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = per_replicate * replicates;
    let w = sphere_measure(dim) / total as f64;
    let mut nodes = Vec::with_capacity(total * dim);
    let mut g = vec![0.0; dim];
    for _ in 0..replicates {
        let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        for i in 1..=per_replicate {
            for (k, (&b, s)) in bases.iter().zip(&shift).enumerate() {
                let mut x = radical_inverse(i as u64, b) + s;
                if x >= 1.0 {
                    x -= 1.0;
                }
                let x = x.clamp(1e-15, 1.0 - 1e-15);
                g[k] = normal.inverse_cdf(x);
            }
            push_normalized(&mut nodes, &g);
        }
    }
    (nodes, vec![w; total])
}

pub(super) fn monte_carlo(dim: usize, count: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = sphere_measure(dim) / count as f64;
    let mut nodes = Vec::with_capacity(count * dim);
    let mut g = vec![0.0; dim];
    for _ in 0..count {
        loop {
            for x in g.iter_mut() {
                *x = rng.sample(StandardNormal);
            }
            if g.iter().map(|x| x * x).sum::<f64>() > 1e-24 {
                break;
            }
        }
        push_normalized(&mut nodes, &g);
    }
    (nodes, vec![w; count])
}

fn push_normalized(out: &mut Vec<f64>, g: &[f64]) {
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    out.extend(g.iter().map(|x| x / norm));
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut c = 2u64;
    while primes.len() < count {
        if primes.iter().take_while(|&&p| p * p <= c).all(|&p| !c.is_multiple_of(p)) {
            primes.push(c);
        }
        c += 1;
    }
    primes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        assert_eq!(first_primes(6), vec![2, 3, 5, 7, 11, 13]);
    }

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec: RuleSpec = serde_json::from_str(r#"{"kind":"qmc","level":5,"seed":42}"#).unwrap();
        assert_eq!(spec, RuleSpec::qmc(5, 42));
        let g: RuleSpec = serde_json::from_str(r#"{"kind":"gauss","level":4}"#).unwrap();
        assert_eq!(serde_json::to_string(&g).unwrap(), r#"{"kind":"gauss","level":4}"#);
    }
}
