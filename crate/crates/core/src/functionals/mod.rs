//! Scalar functionals: Φ_{p,Q}, S_p, V_n, closed-form ball capacities and
//! the two-sided capacity bounds.

mod profile;

pub use profile::{
    geometric_grid, profile_energy, profile_optimal_j, profile_optimize_j, Profile, ProfileFit,
};

use serde::{Deserialize, Serialize};

use crate::bodies::{QBody, StarBody};
use crate::error::{Error, Result};
use crate::projection::{check_p, d_np, ProjectionBody};
use crate::quadrature::{Estimate, RuleSpec};
use crate::special::ball_volume;

/// Inner (S^{n-1}) and outer (S^{nm-1}) quadrature descriptors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rules {
    pub inner: RuleSpec,
    pub outer: RuleSpec,
}

impl Rules {
    pub fn new(inner: RuleSpec, outer: RuleSpec) -> Self {
        Rules { inner, outer }
    }

    /// Product-Gauss at the given level on both spheres (the outer rule
    /// switches to randomized QMC with `seed` when nm > 4).
    pub fn gauss(level: u32, seed: u64) -> Self {
        Rules { inner: RuleSpec::gauss(level), outer: RuleSpec::gauss(level).with_seed(seed) }
    }
}

impl Default for Rules {
    fn default() -> Self {
        Rules::gauss(4, 0)
    }
}

/// Φ_{p,Q}(K) = (∫_{S^{nm-1}} h_{Π_{p,Q}K}^{-nm})^{-p/(nm)}.
pub fn phi(k: &StarBody, q: &QBody, p: f64, rules: &Rules) -> Result<Estimate> {
    ProjectionBody::new(k, q, p, &rules.inner)?.phi(&rules.outer)
}

/// S_p(K) = ∫_{∂K} (z·ν)^{1-p} dH^{n-1}.
pub fn sp_surface(k: &StarBody, p: f64, inner: &RuleSpec) -> Result<Estimate> {
    check_p(p)?;
    let set = k.boundary(inner)?;
    let sum = |els: &[crate::bodies::BoundaryElement]| -> Result<f64> {
        let terms = els
            .iter()
            .map(|e| {
                if !(e.cosine > 0.0) {
                    return Err(Error::geometry(format!("boundary element has z·ν = {:e} <= 0", e.cosine)));
                }
                Ok(if p == 1.0 { e.weight } else { e.cosine.powf(1.0 - p) * e.weight })
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(crate::special::pairwise_sum(&terms))
    };
    let value = sum(&set.elements)?;
    let err = match &set.coarse {
        Some(c) => (value - sum(c)?).abs(),
        None => 0.0,
    };
    let mut est = Estimate::new(value, err, set.method);
    est.nodes_used = set.elements.len();
    Ok(est)
}

pub fn volume(k: &StarBody) -> Estimate {
    k.volume()
}

/// C_p(B_2^n): nω_n((n-p)/(p-1))^{p-1} for 1 < p < n, nω_n at p = 1 and 0
/// for p ≥ n.
pub fn cap_p_variational_ball(n: usize, p: f64) -> Result<f64> {
    check_p(p)?;
    let nf = n as f64;
    let surface = nf * ball_volume(n);
    Ok(if p >= nf {
        0.0
    } else if p == 1.0 {
        surface
    } else {
        surface * profile_optimal_j(n, p)?
    })
}

/// The profile factor J* with the p = 1 shell limit J* = 1.
/// J* for 1 < p < n and 1 at p = 1.
pub fn profile_factor(n: usize, p: f64) -> Result<f64> {
    if p == 1.0 {
        Ok(1.0)
    } else {
        profile_optimal_j(n, p)
    }
}

fn check_capacity_range(n: usize, p: f64) -> Result<()> {
    check_p(p)?;
    if p >= n as f64 {
        return Err(Error::input(format!("capacity bounds need 1 <= p < n, got n = {n}, p = {p}")));
    }
    Ok(())
}

/// C_{p,Q}(B_2^n) in closed form: nω_n d_{n,p}(Q) J* for 1 <= p < n and 0
/// for p ≥ n.
pub fn cap_ball_closed_form(n: usize, q: &QBody, p: f64, rules: &Rules) -> Result<Estimate> {
    check_p(p)?;
    if p >= n as f64 {
        return Ok(Estimate::exact(0.0, "closed-form (p >= n)"));
    }
    let d = d_np(q, n, p, &rules.inner, &rules.outer)?;
    let factor = n as f64 * ball_volume(n) * profile_factor(n, p)?;
    Ok(d.scale(factor).with_method("ball closed form"))
}

/// Upper bound J*·Φ_{p,Q}(K) from the radial test family (Φ_{1,Q}(K) at
/// p = 1, the ε → 0 shell limit).
pub fn cap_upper(k: &StarBody, q: &QBody, p: f64, rules: &Rules) -> Result<Estimate> {
    check_capacity_range(k.dim(), p)?;
    let phi = phi(k, q, p, rules)?;
    Ok(phi.scale(profile_factor(k.dim(), p)?).with_method("radial-profile upper bound"))
}

/// Lower bound C_{p,Q}(B_2^n)·(V_n(K)/ω_n)^{(n-p)/n}.
pub fn cap_lower(k: &StarBody, q: &QBody, p: f64, rules: &Rules) -> Result<Estimate> {
    let n = k.dim();
    check_capacity_range(n, p)?;
    let ball = cap_ball_closed_form(n, q, p, rules)?;
    Ok(lower_from_ball(&ball, k, p))
}

fn lower_from_ball(ball: &Estimate, k: &StarBody, p: f64) -> Estimate {
    let n = k.dim() as f64;
    let ratio = k.volume().value / ball_volume(k.dim());
    ball.clone().scale(ratio.powf((n - p) / n)).with_method("volume lower bound")
}

/// J*·S_p(K) (S_1(K) at p = 1), an upper bound for the classical C_p(K).
pub fn cap_p_upper_radial(k: &StarBody, p: f64, inner: &RuleSpec) -> Result<Estimate> {
    check_capacity_range(k.dim(), p)?;
    let sp = sp_surface(k, p, inner)?;
    Ok(sp.scale(profile_factor(k.dim(), p)?).with_method("radial-profile upper bound (classical)"))
}

/// Bracket [lower, upper] around C_{p,Q}(K).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacitySandwich {
    pub lower: Estimate,
    pub upper: Estimate,
}

impl CapacitySandwich {
    pub fn gap(&self) -> f64 {
        self.upper.value - self.lower.value
    }

    pub fn combined_err(&self) -> f64 {
        self.lower.combined_err(&self.upper)
    }
}

/// Both capacity bounds, sharing one d_{n,p}(Q) evaluation. Fails with a
/// numerical error if lower exceeds upper by more than 3 combined error
/// bars plus 1e-6, which would indicate a quadrature or oracle fault.
pub fn capacity_sandwich(k: &StarBody, q: &QBody, p: f64, rules: &Rules) -> Result<CapacitySandwich> {
    check_capacity_range(k.dim(), p)?;
    let ball = cap_ball_closed_form(k.dim(), q, p, rules)?;
    let lower = lower_from_ball(&ball, k, p);
    let upper = cap_upper(k, q, p, rules)?;
    let sandwich = CapacitySandwich { lower, upper };
    if sandwich.gap() < -(3.0 * sandwich.combined_err() + 1e-6) {
        return Err(Error::Numerical(format!(
            "capacity lower bound {} exceeds upper bound {}",
            sandwich.lower.value, sandwich.upper.value
        )));
    }
    Ok(sandwich)
}
