//! The registered property suite. Each property draws seeded fixtures,
//! evaluates an inequality lhs <= rhs (equalities as |a - b| <= 0) and
//! records violation = lhs - rhs - tol; a property fails iff some
//! violation is positive.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::fixtures::*;
use crate::bodies::{LinearMap, QBody, StarBody};
use crate::config::{matrix_from_rows, BodySpec};
use crate::error::{Error, Result};
use crate::functionals::{cap_ball_closed_form, cap_p_upper_radial, phi, sp_surface, Rules};
use crate::projection::{d_np, h_projection_radial, MatrixDirection, ProjectionBody};
use crate::quadrature::{Estimate, RuleSpec, SphereRule, POSITIVITY_FLOOR};
use crate::special::ball_volume;

pub const PROPERTY_NAMES: [&str; 15] = [
    "proj-positivity",
    "proj-sublinear",
    "proj-homog",
    "proj-affine",
    "phi-symmetry",
    "phi-concavity",
    "phi-affine",
    "phi-homog",
    "sandwich-order",
    "chain",
    "thm42-bound",
    "dnp-limit-p1",
    "nested-consistency",
    "two-formula-agreement",
    "tau-reduction",
];

/// Settings shared by all properties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub trials: usize,
    pub seed: u64,
    pub rules: Rules,
    /// relative tolerance on exact paths
    pub exact_tol: f64,
    /// multiplier on combined error bars for quadrature paths
    pub err_factor: f64,
    /// absolute slack added on quadrature paths
    pub slack: f64,
}

impl VerifyOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        VerifyOptions {
            trials,
            seed,
            rules: Rules::new(RuleSpec::gauss(3), RuleSpec::gauss(3).with_seed(seed)),
            exact_tol: 1e-9,
            err_factor: 3.0,
            slack: 1e-6,
        }
    }

    fn quad_tol(&self, err: f64) -> f64 {
        self.err_factor * err + self.slack
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct FixtureDiagnostic {
    pub trial: usize,
    /// lhs - rhs - tol; positive means violated
    pub violation: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
    pub detail: String,
    /// Full input, enough to replay the fixture.
    pub fixture: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct PropertyReport {
    pub name: String,
    pub fixtures_tried: usize,
    pub max_violation: f64,
    pub seed: u64,
    pub passed: bool,
    pub worst: Option<FixtureDiagnostic>,
    pub diagnostics: Vec<FixtureDiagnostic>,
}

struct Check {
    lhs: f64,
    rhs: f64,
    tol: f64,
    detail: String,
}

impl Check {
    fn le(lhs: f64, rhs: f64, tol: f64, detail: impl Into<String>) -> Self {
        Check { lhs, rhs, tol, detail: detail.into() }
    }

    fn eq(a: f64, b: f64, tol: f64, detail: impl Into<String>) -> Self {
        Check { lhs: (a - b).abs(), rhs: 0.0, tol, detail: detail.into() }
    }

    fn violation(&self) -> f64 {
        let v = self.lhs - self.rhs - self.tol;
        if v.is_nan() {
            f64::MAX
        } else {
            v
        }
    }
}

struct Trial {
    fixture: serde_json::Value,
    checks: Vec<Check>,
}

type TrialFn = fn(&mut ChaCha8Rng, usize, &VerifyOptions) -> Result<Trial>;

fn lookup(name: &str) -> Option<(usize, TrialFn)> {
    let f: TrialFn = match name {
        "proj-positivity" => proj_positivity,
        "proj-sublinear" => proj_sublinear,
        "proj-homog" => proj_homog,
        "proj-affine" => proj_affine,
        "phi-symmetry" => phi_symmetry,
        "phi-concavity" => phi_concavity,
        "phi-affine" => phi_affine,
        "phi-homog" => phi_homog,
        "sandwich-order" => sandwich_order,
        "chain" => chain,
        "thm42-bound" => thm42_bound,
        "dnp-limit-p1" => dnp_limit_p1,
        "nested-consistency" => nested_consistency,
        "two-formula-agreement" => two_formula_agreement,
        "tau-reduction" => tau_reduction,
        _ => return None,
    };
    Some((PROPERTY_NAMES.iter().position(|n| *n == name).expect("registered"), f))
}

/// Runs one registered property over `opts.trials` seeded fixtures.
pub fn check_property(name: &str, opts: &VerifyOptions) -> Result<PropertyReport> {
    let (index, trial_fn) = lookup(name).ok_or_else(|| Error::UnknownProperty {
        name: name.to_string(),
        valid: PROPERTY_NAMES.iter().map(|s| s.to_string()).collect(),
    })?;
    if opts.trials == 0 {
        return Err(Error::input("trials must be at least 1"));
    }
    let stream_seed = opts.seed ^ ((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let diagnostics: Vec<FixtureDiagnostic> = (0..opts.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(stream_seed, trial);
            match trial_fn(&mut rng, trial, opts) {
                Ok(t) => {
                    let worst = t
                        .checks
                        .iter()
                        .max_by(|a, b| a.violation().total_cmp(&b.violation()))
                        .expect("every trial performs a check");
                    FixtureDiagnostic {
                        trial,
                        violation: worst.violation(),
                        lhs: worst.lhs,
                        rhs: worst.rhs,
                        tol: worst.tol,
                        detail: worst.detail.clone(),
                        fixture: t.fixture,
                    }
                }
                Err(e) => FixtureDiagnostic {
                    trial,
                    violation: f64::MAX,
                    lhs: f64::NAN,
                    rhs: f64::NAN,
                    tol: 0.0,
                    detail: format!("evaluation failed: {e}"),
                    fixture: serde_json::Value::Null,
                },
            }
        })
        .collect();
    let worst = diagnostics.iter().max_by(|a, b| a.violation.total_cmp(&b.violation)).cloned();
    let max_violation = worst.as_ref().map_or(f64::NEG_INFINITY, |w| w.violation);
    Ok(PropertyReport {
        name: name.to_string(),
        fixtures_tried: opts.trials,
        max_violation,
        seed: opts.seed,
        passed: max_violation <= 0.0,
        worst,
        diagnostics,
    })
}

/// property × pass/fail × max violation
pub fn summary_table(reports: &[PropertyReport]) -> String {
    let mut out = format!("{:<24} {:>6} {:>8} {:>14}\n", "property", "result", "fixtures", "max violation");
    for r in reports {
        out.push_str(&format!(
            "{:<24} {:>6} {:>8} {:>14.3e}\n",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.fixtures_tried,
            r.max_violation
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// fixture helpers

fn dims(trial: usize) -> (usize, usize) {
    (2 + trial % 2, 1 + (trial / 2) % 2)
}

fn pick_p(rng: &mut ChaCha8Rng, n: usize) -> f64 {
    let choices: &[f64] = if n == 2 { &[1.0, 1.5] } else { &[1.0, 1.5, 2.0] };
    choices[rng.random_range(0..choices.len())]
}

fn unit_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<f64> {
    let u = random_matrix(rng, n, m);
    let norm = crate::bodies::norm(&u);
    u.iter().map(|x| x / norm).collect()
}

fn fixture(body: &BodySpec, q: &QBody, p: f64, extra: serde_json::Value) -> serde_json::Value {
    json!({ "body": body, "q": q, "p": p, "extra": extra })
}

fn rel(x: f64) -> f64 {
    x.abs().max(f64::MIN_POSITIVE)
}

// ---------------------------------------------------------------------------
// projection body

fn proj_positivity(rng: &mut ChaCha8Rng, trial: usize, opts: &VerifyOptions) -> Result<Trial> {
    let (n, m) = dims(trial);
    let spec = random_body(rng, n);
    let q = random_q(rng, m);
    let p = pick_p(rng, n);
    let body = ProjectionBody::new(&spec.build()?, &q, p, &opts.rules.inner)?;
    let mut min = f64::INFINITY;
    for _ in 0..1000 {
        let h = body.h(&unit_matrix(rng, n, m));
        min = if h.is_finite() { min.min(h) } else { f64::NEG_INFINITY };
    }
    Ok(Trial {
        fixture: fixture(&spec, &q, p, json!({ "directions": 1000 })),
        checks: vec![Check::le(POSITIVITY_FLOOR, min, 0.0, format!("min h over 1000 directions = {min:e}"))],
    })
}

fn proj_sublinear(rng: &mut ChaCha8Rng, trial: usize, opts: &VerifyOptions) -> Result<Trial> {
    let (n, m) = dims(trial);
    let spec = random_body(rng, n);
    let q = random_q(rng, m);
    let p = pick_p(rng, n);
    let body = ProjectionBody::new(&spec.build()?, &q, p, &opts.rules.inner)?;
    let mut checks = Vec::new();
    for _ in 0..50 {
        let u1 = random_matrix(rng, n, m);
        let u2: Vec<f64> = random_matrix(rng, n, m).iter().map(|x| x * rng.random_range(0.1..3.0)).collect();
        let sum: Vec<f64> = u1.iter().zip(&u2).map(|(a, b)| a + b).collect();
        let (h1, h2) = (body.h(&u1), body.h(&u2));
        checks.push(Check::le(body.h(&sum), h1 + h2, opts.exact_tol * (h1 + h2), "h(u1+u2) <= h(u1)+h(u2)"));
    }
    Ok(Trial { fixture: fixture(&spec, &q, p, json!({ "pairs": 50 })), checks })
}

fn proj_homog(rng: &mut ChaCha8Rng, trial: usize, opts: &VerifyOptions) -> Result<Trial> {
    let (n, m) = dims(trial);
    let spec = random_body(rng, n);
    let q = random_q(rng, m);
    let p = pick_p(rng, n);
    let a = rng.random_range(0.5..2.0);
    let b = rng.random_range(0.5..2.0);
    let k = spec.build()?;
    let base = ProjectionBody::new(&k, &q, p, &opts.rules.inner)?;
    let scaled = ProjectionBody::new(&k.scaled(a)?, &q.scaled(b)?, p, &opts.rules.inner)?;
    let factor = b * a.powf((n as f64 - p) / p);
    let checks = (0..20)
        .map(|_| {
            let u = unit_matrix(rng, n, m);
            let expected = factor * base.h(&u);
            Check::eq(scaled.h(&u), expected, opts.exact_tol * rel(expected), "h_{Π(bQ)}(aK) = b a^{(n-p)/p} h")
        })
        .collect();
    Ok(Trial { fixture: fixture(&spec, &q, p, json!({ "a": a, "b": b })), checks })
}

fn proj_affine(rng: &mut ChaCha8Rng, trial: usize, opts: &VerifyOptions) -> Result<Trial> {
    let (n, m) = dims(trial);
    let spec = random_body(rng, n);
    let q = random_q(rng, m);
    let p = pick_p(rng, n);
    let rows = random_map(rng, n);
    let map = LinearMap::new(matrix_from_rows(&rows)?)?;
    let k = spec.build()?;
    // pointwise evaluations are cheap, so the inner rule is refined by two
    // levels; at the base level the fine-vs-coarse bar on strongly
    // eccentric images is not reliably conservative
    let inner = RuleSpec::gauss(opts.rules.inner.level + 2);
    let base = ProjectionBody::new(&k, &q, p, &inner)?;
    let image = ProjectionBody::new(&k.linear_image(&map)?, &q, p, &inner)?;
    let exact = base.is_exact();
    let mut checks = Vec::new();
    for _ in 0..20 {
        let u = unit_matrix(rng, n, m);
        let lhs = image.support(&u)?;
        let rhs = base.support(&map.inverse_columnwise(&u))?.scale(map.abs_det().powf(1.0 / p));
        let tol = if exact { opts.exact_tol * rel(rhs.value) } else { opts.quad_tol(lhs.combined_err(&rhs)) };
        checks.push(Check::eq(lhs.value, rhs.value, tol, "h_{Π(φK)}(u) = |det φ|^{1/p} h_{ΠK}(φ^{-1}u)"));
    }
    Ok(Trial { fixture: fixture(&spec, &q, p, json!({ "map": rows })), checks })
}

// ---------------------------------------------------------------------------
// Φ

fn phi_symmetry(rng: &mut ChaCha8Rng, trial: usize, opts: &VerifyOptions) -> Result<Trial> {
    let n = 2 + trial % 2;
    let spec = random_polytope(rng, n);
    let q = random_simplex(rng, 2);
    let p = pick_p(rng, n);
    let k = spec.build()?;
    let a = phi(&k, &q, p, &opts.rules)?;
    let b = phi(&k, &q.negated(), p, &opts.rules)?;
    Ok(Trial {
        fixture: fixture(&spec, &q, p, json!({})),
        checks: vec![Check::eq(a.value, b.value, opts.quad_tol(a.combined_err(&b)), "Φ_{p,Q} = Φ_{p,-Q}")],
    })
}

fn phi_concavity(rng: &mut ChaCha8Rng, trial: usize, opts: &VerifyOptions) -> Result<Trial> {
    let (n, m) = dims(trial);
    let spec = random_body(rng, n);
    let q1 = random_q(rng, m);
    let q2 = random_q(rng, m);
    let p = pick_p(rng, n);
    let lambda = rng.random_range(0.05..0.95);
    let k = spec.build()?;
    let mixed = QBody::lp_sum(&q1, &q2, lambda, p)?;
    let f = phi(&k, &mixed, p, &opts.rules)?;
    let f1 = phi(&k, &q1, p, &opts.rules)?;
    let f2 = phi(&k, &q2, p, &opts.rules)?;
    let rhs = f1.clone().scale(lambda).add(&f2.clone().scale(1.0 - lambda));
    Ok(Trial {
        fixture: fixture(&spec, &mixed, p, json!({ "lambda": lambda })),
        checks: vec![Check::le(rhs.value, f.value, opts.quad_tol(f.combined_err(&rhs)), "Φ(λQ1 +_p (1-λ)Q2) >= λΦ(Q1) + (1-λ)Φ(Q2)")],
    })
}

fn phi_affine(rng: &mut ChaCha8Rng, trial: usize, opts: &VerifyOptions) -> Result<Trial> {
    let (n, m) = dims(trial);
    let spec = random_body(rng, n);
    let q = random_q(rng, m);
    let p = pick_p(rng, n);
    let rows = random_map(rng, n);
    let map = LinearMap::new(matrix_from_rows(&rows)?)?;
    let k = spec.build()?;
    let lhs = phi(&k.linear_image(&map)?, &q, p, &opts.rules)?;
    let rhs = phi(&k, &q, p, &opts.rules)?.scale(map.abs_det().powf((n as f64 - p) / n as f64));
    Ok(Trial {
        fixture: fixture(&spec, &q, p, json!({ "map": rows })),
        checks: vec![Check::eq(lhs.value, rhs.value, opts.quad_tol(lhs.combined_err(&rhs)), "Φ(φK) = |det φ|^{(n-p)/n} Φ(K)")],
    })
}

fn phi_homog(rng: &mut ChaCha8Rng, trial: usize, opts: &VerifyOptions) -> Result<Trial> {
    let (n, m) = dims(trial);
    let spec = random_body(rng, n);
    let q = random_q(rng, m);
    let p = pick_p(rng, n);
    let a = rng.random_range(0.5..3.0);
    let b = rng.random_range(0.5..3.0);
    let k = spec.build()?;
    let lhs = phi(&k.scaled(a)?, &q.scaled(b)?, p, &opts.rules)?;
    let rhs = phi(&k, &q, p, &opts.rules)?.scale(b.powf(p) * a.powf(n as f64 - p));
    Ok(Trial {
        fixture: fixture(&spec, &q, p, json!({ "a": a, "b": b })),
        checks: vec![Check::eq(lhs.value, rhs.value, opts.exact_tol * rel(rhs.value), "Φ_{p,bQ}(aK) = b^p a^{n-p} Φ_{p,Q}(K)")],
    })
}

// ---------------------------------------------------------------------------
// capacity bounds

/// Everything the bound-level properties need for one fixture.
struct BoundData {
    volume_ratio: f64,
    ball_cap: Estimate,
    phi_k: Estimate,
    phi_b: Estimate,
    sp_k: Estimate,
    j: f64,
}

impl BoundData {
    fn compute(k: &StarBody, q: &QBody, p: f64, rules: &Rules) -> Result<Self> {
        let n = k.dim();
        let ball = StarBody::ball(n, 1.0)?;
        let phi_b = phi(&ball, q, p, rules)?;
        let j = if p == 1.0 { 1.0 } else { crate::functionals::profile_optimal_j(n, p)? };
        Ok(BoundData {
            volume_ratio: k.volume().value / ball_volume(n),
            ball_cap: phi_b.clone().scale(j),
            phi_k: phi(k, q, p, rules)?,
            phi_b,
            sp_k: sp_surface(k, p, &rules.inner)?,
            j,
        })
    }

    fn lower(&self, n: usize, p: f64) -> Estimate {
        self.ball_cap.clone().scale(self.volume_ratio.powf((n as f64 - p) / n as f64))
    }

    fn upper(&self) -> Estimate {
        self.phi_k.clone().scale(self.j)
    }
}

fn bound_fixture(rng: &mut ChaCha8Rng, trial: usize) -> (usize, BodySpec, QBody, f64) {
    let (n, m) = dims(trial);
    let spec = random_body(rng, n);
    let q = random_q(rng, m);
    let p = pick_p(rng, n);
    (n, spec, q, p)
}

fn sandwich_order(rng: &mut ChaCha8Rng, trial: usize, opts: &VerifyOptions) -> Result<Trial> {
    let (n, spec, q, p) = bound_fixture(rng, trial);
    let data = BoundData::compute(&spec.build()?, &q, p, &opts.rules)?;
    let (lo, hi) = (data.lower(n, p), data.upper());
    Ok(Trial {
        fixture: fixture(&spec, &q, p, json!({})),
        checks: vec![Check::le(lo.value, hi.value, opts.quad_tol(lo.combined_err(&hi)), "cap_lower <= cap_upper")],
    })
}

/// The three normalized inequalities
/// (V/ω)^{1/n} <= (upper/C(B))^{1/(n-p)},
/// (lower/C(B))^{1/(n-p)} <= (Φ(K)/Φ(B))^{1/(n-p)},
/// (Φ(K)/Φ(B))^{1/(n-p)} <= (S_p(K)/S_p(B))^{1/(n-p)}.
pub(crate) fn chain_checks(k: &StarBody, q: &QBody, p: f64, opts: &VerifyOptions) -> Result<Vec<(f64, f64, f64, &'static str)>> {
    let n = k.dim();
    let data = BoundData::compute(k, q, p, &opts.rules)?;
    let e = 1.0 / (n as f64 - p);
    let vol = data.volume_ratio.powf(1.0 / n as f64);
    let upper = data.upper().div(&data.ball_cap).powf(e);
    let lower = data.lower(n, p).div(&data.ball_cap).powf(e);
    let phi_ratio = data.phi_k.div(&data.phi_b).powf(e);
    let sp_ratio = data.sp_k.clone().scale(1.0 / (n as f64 * ball_volume(n))).powf(e);
    Ok(vec![
        (vol, upper.value, opts.quad_tol(upper.err), "(V/ω)^{1/n} <= (cap_upper/C(B))^{1/(n-p)}"),
        (lower.value, phi_ratio.value, opts.quad_tol(lower.combined_err(&phi_ratio)), "(cap_lower/C(B))^{1/(n-p)} <= (Φ(K)/Φ(B))^{1/(n-p)}"),
        (phi_ratio.value, sp_ratio.value, opts.quad_tol(phi_ratio.combined_err(&sp_ratio)), "(Φ(K)/Φ(B))^{1/(n-p)} <= (S_p(K)/S_p(B))^{1/(n-p)}"),
    ])
}

fn chain(rng: &mut ChaCha8Rng, trial: usize, opts: &VerifyOptions) -> Result<Trial> {
    let (_, spec, q, p) = bound_fixture(rng, trial);
    let checks = chain_checks(&spec.build()?, &q, p, opts)?
        .into_iter()
        .map(|(l, r, t, d)| Check::le(l, r, t, d))
        .collect();
    Ok(Trial { fixture: fixture(&spec, &q, p, json!({})), checks })
}

fn thm42_bound(rng: &mut ChaCha8Rng, trial: usize, opts: &VerifyOptions) -> Result<Trial> {
    let (n, spec, q, p) = bound_fixture(rng, trial);
    let k = spec.build()?;
    let ball_cap = cap_ball_closed_form(n, &q, p, &opts.rules)?;
    let lower = ball_cap.scale((k.volume().value / ball_volume(n)).powf((n as f64 - p) / n as f64));
    let d = d_np(&q, n, p, &opts.rules.inner, &opts.rules.outer)?;
    let rhs = d.mul(&cap_p_upper_radial(&k, p, &opts.rules.inner)?);
    Ok(Trial {
        fixture: fixture(&spec, &q, p, json!({})),
        checks: vec![Check::le(lower.value, rhs.value, opts.quad_tol(lower.combined_err(&rhs)), "cap_lower <= d_{n,p}(Q)·J*·S_p(K)")],
    })
}

fn dnp_limit_p1(rng: &mut ChaCha8Rng, trial: usize, opts: &VerifyOptions) -> Result<Trial> {
    let (n, q) = if trial == 0 {
        (3, QBody::segment(-0.5, 0.5)?)
    } else {
        (2 + trial % 2, random_segment(rng))
    };
    let d1 = d_np(&q, n, 1.0, &opts.rules.inner, &opts.rules.outer)?;
    let dp = d_np(&q, n, 1.001, &opts.rules.inner, &opts.rules.outer)?;
    let gap = (dp.value - d1.value).abs();
    Ok(Trial {
        fixture: json!({ "n": n, "q": q, "p": 1.001 }),
        checks: vec![Check::le(gap, 0.01 * d1.value, opts.quad_tol(dp.combined_err(&d1)), "|d_{n,1.001} - d_{n,1}| <= 1% d_{n,1}")],
    })
}

fn nested_consistency(rng: &mut ChaCha8Rng, trial: usize, opts: &VerifyOptions) -> Result<Trial> {
    let (n, spec, q, p) = bound_fixture(rng, trial);
    let outer = spec.build()?;
    let (inner_spec, how) = if trial.is_multiple_of(2) {
        let s = rng.random_range(0.3..0.95);
        (spec.scaled(s), format!("scaled by {s}"))
    } else {
        let r = 0.9 * outer.inradius().expect("fixtures have exact inradii");
        (BodySpec::Ball { n, radius: r }, format!("ball of radius {r}"))
    };
    let inner = inner_spec.build()?;
    let ball_cap = cap_ball_closed_form(n, &q, p, &opts.rules)?;
    let lower = ball_cap.scale((inner.volume().value / ball_volume(n)).powf((n as f64 - p) / n as f64));
    let upper = crate::functionals::cap_upper(&outer, &q, p, &opts.rules)?;
    Ok(Trial {
        fixture: fixture(&spec, &q, p, json!({ "inner": inner_spec, "inner_kind": how })),
        checks: vec![Check::le(lower.value, upper.value, opts.quad_tol(lower.combined_err(&upper)), "K1 ⊂ K2: cap_lower(K1) <= cap_upper(K2)")],
    })
}

// ---------------------------------------------------------------------------
// cross-checks

fn two_formula_agreement(rng: &mut ChaCha8Rng, trial: usize, opts: &VerifyOptions) -> Result<Trial> {
    let (n, m) = dims(trial);
    let spec = if trial % 3 == 2 {
        BodySpec::LqBall { n, q: rng.random_range(1.5..4.0), radius: rng.random_range(0.5..2.0) }
    } else {
        random_ellipsoid(rng, n)
    };
    let q = random_q(rng, m);
    let p = pick_p(rng, n);
    let k = spec.build()?;
    let inner = RuleSpec::gauss(opts.rules.inner.level + 1);
    let body = ProjectionBody::new(&k, &q, p, &inner)?;
    let mut checks = Vec::new();
    for _ in 0..5 {
        let u = MatrixDirection::new(n, m, unit_matrix(rng, n, m))?;
        let a = body.support(&u.entries)?;
        let b = h_projection_radial(&k, &q, p, &u, &inner)?;
        checks.push(Check::eq(a.value, b.value, opts.quad_tol(a.combined_err(&b)), "boundary sum = radial formula"));
    }
    Ok(Trial { fixture: fixture(&spec, &q, p, json!({})), checks })
}

const TAU_CASES: [(f64, f64); 6] = [(-1.0, 1.0), (0.0, 1.0), (0.5, 1.0), (-1.0, 2.0), (0.0, 2.0), (0.5, 2.0)];

/// Φ computed from φ_τ(t)^p = ((1+τ)/2) t₊^p + ((1-τ)/2) t₋^p directly,
/// without any Q body.
fn phi_tau_direct(k: &StarBody, tau: f64, p: f64, rules: &Rules) -> Result<Estimate> {
    let n = k.dim();
    let set = k.boundary(&rules.inner)?;
    let weight = |t: f64| (1.0 + tau) / 2.0 * t.max(0.0).powf(p) + (1.0 - tau) / 2.0 * (-t).max(0.0).powf(p);
    let rule = SphereRule::new(n, &rules.outer)?;
    let moment = |els: &[crate::bodies::BoundaryElement]| {
        rule.integrate(|u| {
            let hp: f64 = els
                .iter()
                .map(|e| weight(crate::bodies::dot(e.normal.as_slice(), u)) * e.cosine.powf(1.0 - p) * e.weight)
                .sum();
            hp.powf(-(n as f64) / p)
        })
    };
    let fine = moment(&set.elements)?;
    let inner_err = match &set.coarse {
        Some(c) => (fine.value - moment(c)?.value).abs(),
        None => 0.0,
    };
    let err = (fine.err * fine.err + inner_err * inner_err).sqrt();
    Ok(Estimate { err, ..fine }.powf(-p / n as f64))
}

fn tau_reduction(rng: &mut ChaCha8Rng, trial: usize, opts: &VerifyOptions) -> Result<Trial> {
    let n = 2 + (trial / TAU_CASES.len()) % 2;
    let (tau, p) = TAU_CASES[trial % TAU_CASES.len()];
    let p = if p >= n as f64 { 1.5 } else { p };
    let spec = random_body(rng, n);
    let k = spec.build()?;
    let q = QBody::tau_segment(tau, p)?;
    let via_q = phi(&k, &q, p, &opts.rules)?;
    let direct = phi_tau_direct(&k, tau, p, &opts.rules)?;
    Ok(Trial {
        fixture: fixture(&spec, &q, p, json!({ "tau": tau })),
        checks: vec![Check::eq(via_q.value, direct.value, opts.quad_tol(via_q.combined_err(&direct)), "Φ via Q_τ = Φ via φ_τ")],
    })
}
