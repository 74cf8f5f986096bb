//! The one-dimensional radial profile problem: minimize
//! J(g) = ∫_1^∞ |g'(s)|^p s^{n-1} ds over nonincreasing g with g(1) = 1 and
//! g(∞) = 0, discretized by piecewise-linear g on a geometric grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-linear nonincreasing profile on a grid 1 = s_0 < … < s_N.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub n: usize,
    pub p: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl Profile {
    /// J(g) = Σ_k |Δg_k / Δs_k|^p (s_{k+1}^n - s_k^n) / n, exact for
    /// piecewise-linear g.
    pub fn energy(&self) -> f64 {
        profile_energy(self.n, self.p, &self.grid, &self.values)
    }

    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Output of [`profile_optimize_j`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileFit {
    pub profile: Profile,
    pub j: f64,
    pub j_star: f64,
    /// ∫_{S_max}^∞ of the exact optimal profile's integrand, i.e. the energy
    /// the truncated grid cannot see.
    pub tail_bound: f64,
}

/// J* = ((n-p)/(p-1))^{p-1}, the energy of g(s) = s^{(n-p)/(1-p)}.
pub fn profile_optimal_j(n: usize, p: f64) -> Result<f64> {
    let nf = n as f64;
    if !(p > 1.0 && p < nf) {
        return Err(Error::input(format!("the profile optimum needs 1 < p < n, got n = {n}, p = {p}")));
    }
    Ok(((nf - p) / (p - 1.0)).powf(p - 1.0))
}

/// Geometric grid s_k = S_max^{k/N}, k = 0..=N.
pub fn geometric_grid(intervals: usize, s_max: f64) -> Vec<f64> {
    (0..=intervals)
        .map(|k| if k == intervals { s_max } else { s_max.powf(k as f64 / intervals as f64) })
        .collect()
}

pub fn profile_energy(n: usize, p: f64, grid: &[f64], values: &[f64]) -> f64 {
    let nf = n as f64;
    let terms: Vec<f64> = grid
        .windows(2)
        .zip(values.windows(2))
        .map(|(s, g)| {
            let slope = ((g[1] - g[0]) / (s[1] - s[0])).abs();
            slope.powf(p) * (s[1].powf(nf) - s[0].powf(nf)) / nf
        })
        .collect();
    crate::special::pairwise_sum(&terms)
}

/// Minimizes J over monotone piecewise-linear profiles with g_0 = 1 and
/// g_N = 0 on the geometric grid with N intervals up to `s_max`.
///
/// In the drops d_k = g_k - g_{k+1} the problem is min Σ a_k d_k^p subject
/// to Σ d_k = 1, d_k ≥ 0, with a_k = (s_{k+1}^n - s_k^n)/(n Δs_k^p). It is
/// strictly convex for p > 1 and its KKT point is d_k ∝ a_k^{-1/(p-1)},
/// giving J = (Σ a_k^{-1/(p-1)})^{1-p}. Weights are combined in log space.
pub fn profile_optimize_j(n: usize, p: f64, intervals: usize, s_max: f64) -> Result<ProfileFit> {
    let j_star = profile_optimal_j(n, p)?;
    if intervals < 16 {
        return Err(Error::input(format!("profile grid needs N >= 16 intervals, got {intervals}")));
    }
    if !(s_max > 1.0 && s_max.is_finite()) {
        return Err(Error::input(format!("S_max must be finite and > 1, got {s_max}")));
    }
    let nf = n as f64;
    let grid = geometric_grid(intervals, s_max);
    let log_weights: Vec<f64> = grid
        .windows(2)
        .map(|s| {
            let ds = s[1] - s[0];
            let log_a = (s[1].powf(nf) - s[0].powf(nf)).ln() - nf.ln() - p * ds.ln();
            -log_a / (p - 1.0)
        })
        .collect();
    let top = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = log_weights.iter().map(|l| (l - top).exp()).collect();
    let total = crate::special::pairwise_sum(&scaled);
    let log_sum = top + total.ln();
    let j = ((1.0 - p) * log_sum).exp();

    let mut values = Vec::with_capacity(grid.len());
    let mut g = 1.0;
    values.push(g);
    let mut consumed = 0.0;
    for w in &scaled {
        consumed += w;
        g = (1.0 - consumed / total).max(0.0);
        values.push(g);
    }
    *values.last_mut().expect("nonempty") = 0.0;
    let profile = Profile { n, p, grid, values };

    let direct = profile.energy();
    if !(j.is_finite() && (direct - j).abs() <= 1e-8 * j) {
        return Err(Error::Numerical(format!(
            "profile optimizer is inconsistent: closed-form J = {j}, energy of the returned profile = {direct}"
        )));
    }
    let tail_bound = j_star * s_max.powf(-(nf - p) / (p - 1.0));
    Ok(ProfileFit { profile, j, j_star, tail_bound })
}
