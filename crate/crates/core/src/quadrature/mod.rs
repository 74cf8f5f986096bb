//! Integration on unit spheres S^{d-1}.
//!
//! Deterministic product rules exist for d ∈ {2, 3, 4}; every other dimension
//! (and any explicit request) uses randomized quasi-Monte Carlo or plain Monte
//! Carlo built from normalized Gaussian samples. Node values are evaluated in
//! parallel and reduced with a fixed pairwise tree, so results do not depend
//! on the worker count.

mod estimate;
mod rules;

pub use estimate::Estimate;
pub use rules::{RuleKind, RuleSpec};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::special::{pairwise_sum, sphere_measure};

/// Number of independent randomized-QMC replicates used to furnish `err`.
/// The node budget is 3·1000·4^level split evenly across them; with only
/// three replicates the standard error has two degrees of freedom and a
/// 3·err band misses far too often.
pub const QMC_REPLICATES: usize = 12;

const QMC_BUDGET: usize = 3;

/// Smallest support value accepted by [`neg_power_moment`].
pub const POSITIVITY_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
enum ErrorModel {
    /// Deterministic rule; `err` is the larger of the last two level
    /// differences. Kinked integrands (radial functions of polytopes) converge
    /// non-monotonically, and two neighbouring levels can agree far better
    /// than either agrees with the limit.
    TwoLevel(Option<Box<SphereRule>>),
    /// `count` equally sized replicate blocks, laid out contiguously.
    Replicates(usize),
    SampleVariance,
}

/// A quadrature rule on S^{d-1}: unit nodes with positive weights summing to
/// the surface measure.
#[derive(Clone, Debug)]
pub struct SphereRule {
    dim: usize,
    kind: RuleKind,
    level: u32,
    seed: Option<u64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    error_model: ErrorModel,
}

impl SphereRule {
    /// Builds the rule described by `spec` on S^{d-1}.
    ///
    /// A `gauss` request for d > 4 falls back to randomized QMC with the
    /// spec's seed (or 0).
    pub fn new(dim: usize, spec: &RuleSpec) -> Result<Self> {
        if dim < 2 {
            return Err(Error::input(format!("sphere rules need d >= 2, got {dim}")));
        }
        let kind = match spec.kind {
            RuleKind::Gauss if dim > 4 => RuleKind::Qmc,
            k => k,
        };
        let seed = spec.seed.unwrap_or(0);
        let rule = match kind {
            RuleKind::Gauss => {
                let coarse = (spec.level > 0).then(|| {
                    let mut coarse = Self::gauss(dim, spec.level - 1);
                    if spec.level > 1 {
                        coarse.error_model = ErrorModel::TwoLevel(Some(Box::new(Self::gauss(dim, spec.level - 2))));
                    }
                    Box::new(coarse)
                });
                let mut rule = Self::gauss(dim, spec.level);
                rule.error_model = ErrorModel::TwoLevel(coarse);
                rule
            }
            RuleKind::Qmc => {
                let per = QMC_BUDGET * rules::stochastic_count(spec.level) / QMC_REPLICATES;
                let (nodes, weights) = rules::qmc(dim, per, QMC_REPLICATES, seed);
                SphereRule {
                    dim,
                    kind,
                    level: spec.level,
                    seed: Some(seed),
                    nodes,
                    weights,
                    error_model: ErrorModel::Replicates(QMC_REPLICATES),
                }
            }
            RuleKind::Mc => {
                let count = rules::stochastic_count(spec.level);
                let (nodes, weights) = rules::monte_carlo(dim, count, seed);
                SphereRule {
                    dim,
                    kind,
                    level: spec.level,
                    seed: Some(seed),
                    nodes,
                    weights,
                    error_model: ErrorModel::SampleVariance,
                }
            }
        };
        Ok(rule)
    }

    fn gauss(dim: usize, level: u32) -> Self {
        let (nodes, weights) = rules::product_gauss(dim, level);
        SphereRule {
            dim,
            kind: RuleKind::Gauss,
            level,
            seed: None,
            nodes,
            weights,
            error_model: ErrorModel::TwoLevel(None),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes.chunks_exact(self.dim).zip(self.weights.iter().copied())
    }

    /// The next coarser deterministic rule, when one exists.
    pub fn coarse(&self) -> Option<&SphereRule> {
        match &self.error_model {
            ErrorModel::TwoLevel(Some(c)) => Some(c),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        format!("{}(d={}, level={})", self.kind.name(), self.dim, self.level)
    }

    /// Σ w_i f(node_i) with an error bar per the rule's error model.
    pub fn integrate<F>(&self, f: F) -> Result<Estimate>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        self.integrate_with(|u| Ok(f(u)))
    }

    /// Like [`integrate`](Self::integrate) for fallible integrands; the
    /// first failing node (in node order) is reported.
    pub fn integrate_with<F>(&self, f: F) -> Result<Estimate>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let values = self.evaluate(&f)?;
        let weighted: Vec<f64> = values.iter().zip(&self.weights).map(|(v, w)| v * w).collect();
        let value = pairwise_sum(&weighted);
        let mut nodes_used = self.len();
        let err = match &self.error_model {
            ErrorModel::TwoLevel(None) => 0.0,
            ErrorModel::TwoLevel(Some(coarse)) => {
                let coarse_value = coarse.weighted_sum(&f)?;
                nodes_used += coarse.len();
                let mut err = (value - coarse_value).abs();
                if let ErrorModel::TwoLevel(Some(coarser)) = &coarse.error_model {
                    nodes_used += coarser.len();
                    err = err.max((coarse_value - coarser.weighted_sum(&f)?).abs());
                }
                err
            }
            ErrorModel::Replicates(count) => {
                let block = weighted.len() / count;
                let reps: Vec<f64> = weighted
                    .chunks_exact(block)
                    .map(|c| pairwise_sum(c) * *count as f64)
                    .collect();
                let mean = reps.iter().sum::<f64>() / reps.len() as f64;
                let var = reps.iter().map(|r| (r - mean).powi(2)).sum::<f64>()
                    / (reps.len() * (reps.len() - 1)) as f64;
                var.sqrt()
            }
            ErrorModel::SampleVariance => {
                let measure = sphere_measure(self.dim);
                let n = values.len() as f64;
                let mean = pairwise_sum(&values) / n;
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
                measure * (var / n).sqrt()
            }
        };
        Ok(Estimate {
            value,
            err,
            nodes_used,
            seed: self.seed,
            method: self.describe(),
        })
    }

    fn weighted_sum<F>(&self, f: &F) -> Result<f64>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let values = self.evaluate(f)?;
        let weighted: Vec<f64> = values.iter().zip(&self.weights).map(|(v, w)| v * w).collect();
        Ok(pairwise_sum(&weighted))
    }

    fn evaluate<F>(&self, f: &F) -> Result<Vec<f64>>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let results: Vec<Result<f64>> = (0..self.len())
            .into_par_iter()
            .map(|i| {
                let u = self.node(i);
                let v = f(u)?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Integrand { node: u.to_vec(), value: v })
                }
            })
            .collect();
        results.into_iter().collect()
    }
}

/// Builds the rule for `spec` on S^{d-1}; see [`SphereRule::new`].
pub fn sphere_rule(dim: usize, spec: &RuleSpec) -> Result<SphereRule> {
    SphereRule::new(dim, spec)
}

/// (1/d) ∫_{S^{d-1}} h(u)^{-d} du, the volume of the polar of the body with
/// support function `h`.
pub fn neg_power_moment<F>(h: F, rule: &SphereRule) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = rule.dim();
    let est = rule.integrate_with(|u| {
        let v = h(u);
        if !(v > POSITIVITY_FLOOR) {
            return Err(Error::Positivity { node: u.to_vec(), value: v });
        }
        Ok(v.powi(-(d as i32)))
    })?;
    Ok(est.scale(1.0 / d as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn gauss(level: u32) -> RuleSpec {
        RuleSpec::gauss(level)
    }

    #[test]
    fn weights_sum_to_sphere_measure() {
        for d in 2..=4 {
            for level in 0..=5 {
                let rule = SphereRule::new(d, &gauss(level)).unwrap();
                let w: Vec<f64> = rule.nodes().map(|(_, w)| w).collect();
                let total = pairwise_sum(&w);
                assert_relative_eq!(total, sphere_measure(d), max_relative = 1e-12);
                for (u, w) in rule.nodes() {
                    let norm: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
                    assert!((norm - 1.0).abs() < 1e-12);
                    assert!(w > 0.0);
                }
            }
        }
    }

    #[test]
    fn constant_on_circle() {
        for level in 0..5 {
            let rule = SphereRule::new(2, &gauss(level)).unwrap();
            let est = rule.integrate(|_| 1.0).unwrap();
            assert!((est.value - 2.0 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn second_moment_on_s2() {
        let rule = SphereRule::new(3, &gauss(2)).unwrap();
        let est = rule.integrate(|u| u[0] * u[0]).unwrap();
        assert!((est.value - 4.0 * PI / 3.0).abs() < 1e-10);
    }

    #[test]
    fn abs_cos_on_circle() {
        let rule = SphereRule::new(2, &gauss(6)).unwrap();
        let est = rule.integrate(|u| u[0].abs()).unwrap();
        assert!((est.value - 4.0).abs() < 1e-10, "{}", est.value);
    }

    #[test]
    fn monte_carlo_sphere_measure_s3() {
        let rule = SphereRule::new(4, &RuleSpec::mc(2, 11)).unwrap();
        // 1 has zero variance; use a nonconstant integrand with known mean too.
        let est = rule.integrate(|_| 1.0).unwrap();
        assert!((est.value - 2.0 * PI * PI).abs() <= 3.0 * est.err + 1e-9);
        let second = rule.integrate(|u| u[0] * u[0]).unwrap();
        let exact = 2.0 * PI * PI / 4.0;
        assert!(second.err > 0.0);
        assert!((second.value - exact).abs() <= 3.0 * second.err);
    }

    #[test]
    fn qmc_replicates_give_error_bar() {
        let rule = SphereRule::new(6, &RuleSpec::qmc(1, 42)).unwrap();
        assert_eq!(rule.kind(), RuleKind::Qmc);
        let exact = sphere_measure(6) / 6.0;
        let est = rule.integrate(|u| u[2] * u[2]).unwrap();
        assert!(est.err > 0.0);
        assert!((est.value - exact).abs() <= 4.0 * est.err, "{est:?} vs {exact}");
        let total = rule.integrate(|_| 1.0).unwrap();
        assert_relative_eq!(total.value, sphere_measure(6), max_relative = 1e-12);
    }

    #[test]
    fn gauss_request_above_four_falls_back() {
        let rule = SphereRule::new(5, &gauss(1)).unwrap();
        assert_eq!(rule.kind(), RuleKind::Qmc);
    }

    #[test]
    fn non_finite_integrand_reports_node() {
        let rule = SphereRule::new(2, &gauss(1)).unwrap();
        let err = rule.integrate(|u| if u[0] > 0.9 { f64::NAN } else { 0.0 }).unwrap_err();
        match err {
            Error::Integrand { node, .. } => assert!(node[0] > 0.9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn polar_volumes() {
        let r2 = SphereRule::new(2, &gauss(4)).unwrap();
        let r3 = SphereRule::new(3, &gauss(3)).unwrap();
        assert!((neg_power_moment(|_| 1.0, &r2).unwrap().value - PI).abs() < 1e-12);
        let v = neg_power_moment(|_| 2.0, &r3).unwrap().value;
        assert_relative_eq!(v, 4.0 * PI / 3.0 / 8.0, max_relative = 1e-12);
        // support of the square [-1,1]^2; polar is the cross-polytope of area 2
        let fine = SphereRule::new(2, &gauss(9)).unwrap();
        let est = neg_power_moment(|u| u[0].abs() + u[1].abs(), &fine).unwrap();
        assert!((est.value - 2.0).abs() < 1e-9, "{est:?}");
    }

    #[test]
    fn positivity_floor_is_enforced() {
        let rule = SphereRule::new(2, &gauss(2)).unwrap();
        let err = neg_power_moment(|u| u[0].max(0.0), &rule).unwrap_err();
        assert!(matches!(err, Error::Positivity { .. }));
    }

    #[test]
    fn identical_seed_is_bit_identical() {
        let a = SphereRule::new(7, &RuleSpec::qmc(1, 9)).unwrap();
        let b = SphereRule::new(7, &RuleSpec::qmc(1, 9)).unwrap();
        let f = |u: &[f64]| (u[0] + 2.0 * u[3]).exp();
        assert_eq!(a.integrate(f).unwrap(), b.integrate(f).unwrap());
    }
}
