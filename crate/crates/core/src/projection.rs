//! The (L_p, Q)-projection body Π_{p,Q}K ⊂ M_{n,m}(R), its support function
//! (boundary sum and radial formula), polar volume and the constant
//! d_{n,p}(Q).
//!
//! Matrix directions u ∈ M_{n,m} are stored column-major as flat vectors of
//! length nm; sphere rules on S^{nm-1} emit that layout directly.

use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::bodies::{BoundaryElement, QBody, StarBody};
use crate::error::{Error, Result};
use crate::quadrature::{neg_power_moment, Estimate, RuleSpec, SphereRule};
use crate::special::ball_volume;

/// An n×m matrix of unit Frobenius norm, stored column-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDirection {
    pub n: usize,
    pub m: usize,
    pub entries: Vec<f64>,
}

impl MatrixDirection {
    pub fn new(n: usize, m: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * m || n == 0 || m == 0 {
            return Err(Error::input(format!("matrix direction needs {n}x{m} entries, got {}", entries.len())));
        }
        let norm = crate::bodies::norm(&entries);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::input(format!("matrix direction has Frobenius norm {norm}, expected 1")));
        }
        Ok(MatrixDirection { n, m, entries })
    }

    /// Normalizes a nonzero matrix.
    pub fn normalized(n: usize, m: usize, entries: Vec<f64>) -> Result<Self> {
        let norm = crate::bodies::norm(&entries);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::input("cannot normalize a zero or non-finite matrix"));
        }
        Self::new(n, m, entries.iter().map(|x| x / norm).collect())
    }

    /// The column-major matrix with a single 1 at (row, col).
    pub fn unit(n: usize, m: usize, row: usize, col: usize) -> Result<Self> {
        if row >= n || col >= m {
            return Err(Error::input("unit matrix index out of range"));
        }
        let mut entries = vec![0.0; n * m];
        entries[col * n + row] = 1.0;
        Self::new(n, m, entries)
    }
}

/// vᵀu for v ∈ R^n and a column-major n×m matrix u, written into `out`.
#[inline]
pub fn row_times_matrix(v: &[f64], u: &[f64], out: &mut [f64]) {
    let n = v.len();
    for (j, col) in u.chunks_exact(n).enumerate() {
        out[j] = crate::bodies::dot(v, col);
    }
}

/// t^p with cheap paths for the exponents the suites use most.
#[inline]
fn pow_p(t: f64, p: f64) -> f64 {
    if p == 1.0 {
        t
    } else if p == 2.0 {
        t * t
    } else if p == 1.5 {
        t * t.sqrt()
    } else {
        t.powf(p)
    }
}

#[derive(Clone, Debug)]
struct WeightedNormals {
    normals: Vec<f64>,
    /// c^{1-p} w per element
    weights: Vec<f64>,
}

impl WeightedNormals {
    fn new(elements: &[BoundaryElement], p: f64) -> Result<Self> {
        let mut normals = Vec::with_capacity(elements.len() * elements.first().map_or(0, |e| e.normal.len()));
        let mut weights = Vec::with_capacity(elements.len());
        for e in elements {
            if !(e.cosine > 0.0) {
                return Err(Error::geometry(format!("boundary element has z·ν = {:e} <= 0", e.cosine)));
            }
            normals.extend(e.normal.iter());
            weights.push(if p == 1.0 { e.weight } else { e.cosine.powf(1.0 - p) * e.weight });
        }
        Ok(WeightedNormals { normals, weights })
    }

    /// Σ h_Q(νᵀu)^p · c^{1-p} w
    fn power_sum(&self, q: &QBody, p: f64, n: usize, u: &[f64]) -> f64 {
        let m = u.len() / n;
        let mut buf = [0.0f64; 16];
        let row = &mut buf[..m];
        let mut total = 0.0;
        for (nu, w) in self.normals.chunks_exact(n).zip(&self.weights) {
            row_times_matrix(nu, u, row);
            let h = q.h(row);
            total += pow_p(h, p) * w;
        }
        total
    }

    fn surface_sum(&self) -> f64 {
        crate::special::pairwise_sum(&self.weights)
    }
}

/// Π_{p,Q}K with the per-element weights c^{1-p}w precomputed.
#[derive(Clone, Debug)]
pub struct ProjectionBody {
    n: usize,
    m: usize,
    p: f64,
    q: QBody,
    fine: WeightedNormals,
    coarse: Option<WeightedNormals>,
    method: String,
}

/// Largest m accepted for the projection body.
const MAX_M: usize = 16;

impl ProjectionBody {
    pub fn new(k: &StarBody, q: &QBody, p: f64, inner: &RuleSpec) -> Result<Self> {
        check_p(p)?;
        q.validate()?;
        let m = q.dim();
        if m > MAX_M {
            return Err(Error::input(format!("m = {m} exceeds the supported {MAX_M}")));
        }
        let set = k.boundary(inner)?;
        let fine = WeightedNormals::new(&set.elements, p)?;
        let coarse = set.coarse.as_deref().map(|c| WeightedNormals::new(c, p)).transpose()?;
        Ok(ProjectionBody { n: k.dim(), m, p, q: q.clone(), fine, coarse, method: set.method })
    }

    /// Builds the body from explicit elements, e.g. a shell decomposition
    /// whose weights are not boundary measures.
    pub(crate) fn from_elements(
        n: usize,
        q: &QBody,
        p: f64,
        elements: &[BoundaryElement],
        coarse: Option<&[BoundaryElement]>,
        method: String,
    ) -> Result<Self> {
        check_p(p)?;
        q.validate()?;
        let fine = WeightedNormals::new(elements, p)?;
        let coarse = coarse.map(|c| WeightedNormals::new(c, p)).transpose()?;
        Ok(ProjectionBody { n, m: q.dim(), p, q: q.clone(), fine, coarse, method })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn is_exact(&self) -> bool {
        self.coarse.is_none()
    }

    pub fn method(&self) -> &str {
        &self.method
    }

    /// h_{Π_{p,Q}K}(u) for a column-major n×m matrix u (any norm).
    pub fn h(&self, u: &[f64]) -> f64 {
        root(self.fine.power_sum(&self.q, self.p, self.n, u), self.p)
    }

    fn h_coarse(&self, u: &[f64]) -> Option<f64> {
        self.coarse.as_ref().map(|c| root(c.power_sum(&self.q, self.p, self.n, u), self.p))
    }

    /// Support value with error bar (difference to the coarse element set).
    pub fn support(&self, u: &[f64]) -> Result<Estimate> {
        if u.len() != self.n * self.m {
            return Err(Error::input(format!("matrix direction of length {} for n·m = {}", u.len(), self.n * self.m)));
        }
        let value = self.h(u);
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Positivity { node: u.to_vec(), value });
        }
        let err = self.h_coarse(u).map_or(0.0, |c| (value - c).abs());
        Ok(Estimate::new(value, err, self.method.clone()))
    }

    /// S_p(K) = Σ c^{1-p} w from the same element set.
    pub fn lp_surface(&self) -> Estimate {
        let value = self.fine.surface_sum();
        let err = self.coarse.as_ref().map_or(0.0, |c| (value - c.surface_sum()).abs());
        Estimate::new(value, err, self.method.clone())
    }

    /// V_{nm}(Π*_{p,Q}K) over the outer rule on S^{nm-1}. The error combines
    /// the outer rule's estimate with the change from the coarse inner set.
    pub fn polar_volume(&self, outer: &RuleSpec) -> Result<Estimate> {
        let d = self.n * self.m;
        let rule = SphereRule::new(d, outer)?;
        let est = neg_power_moment(|u| self.h(u), &rule)?;
        let inner_err = match &self.coarse {
            Some(c) => {
                let coarse = neg_power_moment(|u| root(c.power_sum(&self.q, self.p, self.n, u), self.p), &rule)?;
                (est.value - coarse.value).abs()
            }
            None => 0.0,
        };
        let err = (est.err * est.err + inner_err * inner_err).sqrt();
        let method = format!("{}; outer {}", self.method, est.method);
        Ok(Estimate { err, method, ..est })
    }

    /// Φ_{p,Q}(K) = (nm · V_{nm}(Π*))^{-p/(nm)}.
    pub fn phi(&self, outer: &RuleSpec) -> Result<Estimate> {
        let nm = (self.n * self.m) as f64;
        Ok(self.polar_volume(outer)?.scale(nm).powf(-self.p / nm))
    }
}

fn root(sum: f64, p: f64) -> f64 {
    if p == 1.0 {
        sum
    } else {
        sum.powf(1.0 / p)
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("p must be a finite number >= 1, got {p}")))
    }
}

/// h_{Π_{p,Q}K}(u) from boundary elements.
pub fn h_projection(k: &StarBody, q: &QBody, p: f64, u: &MatrixDirection, inner: &RuleSpec) -> Result<Estimate> {
    check_dims(k, q, u)?;
    ProjectionBody::new(k, q, p, inner)?.support(&u.entries)
}

/// h_{Π_{p,Q}K}(u) from the radial formula
/// (∫_{S^{n-1}} h_Q(∇p_K(θ)ᵀu)^p ρ_K(θ)^n dθ)^{1/p}.
pub fn h_projection_radial(
    k: &StarBody,
    q: &QBody,
    p: f64,
    u: &MatrixDirection,
    rule: &RuleSpec,
) -> Result<Estimate> {
    check_p(p)?;
    check_dims(k, q, u)?;
    let n = k.dim();
    let m = q.dim();
    let sphere = SphereRule::new(n, rule)?;
    let jittered = AtomicUsize::new(0);
    let est = sphere.integrate_with(|theta| {
        let rho = k.radial(theta)?;
        let (grad, tied) = k.gauge_gradient(theta);
        if tied {
            jittered.fetch_add(1, Ordering::Relaxed);
        }
        let mut row = vec![0.0; m];
        row_times_matrix(&grad, &u.entries, &mut row);
        Ok(q.h(&row).powf(p) * rho.powi(n as i32))
    })?;
    let count = jittered.into_inner();
    let mut out = est.powf(1.0 / p);
    out.method = format!("radial-formula {}", sphere.describe());
    if count > 0 {
        out.method.push_str(&format!("; ridge jitter at {count} nodes"));
    }
    Ok(out)
}

fn check_dims(k: &StarBody, q: &QBody, u: &MatrixDirection) -> Result<()> {
    if u.n != k.dim() || u.m != q.dim() {
        return Err(Error::input(format!(
            "direction is {}x{}, body and Q need {}x{}",
            u.n,
            u.m,
            k.dim(),
            q.dim()
        )));
    }
    Ok(())
}

/// V_{nm}(Π*_{p,Q}K).
pub fn polar_volume_projection(
    k: &StarBody,
    q: &QBody,
    p: f64,
    inner: &RuleSpec,
    outer: &RuleSpec,
) -> Result<Estimate> {
    ProjectionBody::new(k, q, p, inner)?.polar_volume(outer)
}

/// d_{n,p}(Q) = (nω_n)^{-1} (nm V_{nm}(Π*_{p,Q}B_2^n))^{-p/(nm)}.
pub fn d_np(q: &QBody, n: usize, p: f64, inner: &RuleSpec, outer: &RuleSpec) -> Result<Estimate> {
    let ball = StarBody::ball(n, 1.0)?;
    let phi = ProjectionBody::new(&ball, q, p, inner)?.phi(outer)?;
    Ok(phi.scale(1.0 / (n as f64 * ball_volume(n))))
}
