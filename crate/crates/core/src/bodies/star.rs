use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::gamma;

use super::polytope::{jitter_direction, RIDGE_TIE};
use super::{BoundaryElement, BoundarySet, LinearMap, Polytope, RadialTable};
use crate::error::{Error, Result};
use crate::quadrature::{Estimate, RuleKind, RuleSpec, SphereRule};
use crate::special::ball_volume;

/// K = A·B_2^n for a symmetric positive-definite A.
#[derive(Clone, Debug, PartialEq)]
pub struct Ellipsoid {
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
    det: f64,
}

impl Ellipsoid {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n < 2 || !matrix.is_square() {
            return Err(Error::input("ellipsoid matrix must be square with n >= 2"));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("ellipsoid matrix has non-finite entries"));
        }
        let scale = matrix.amax();
        if (&matrix - matrix.transpose()).amax() > 1e-12 * scale {
            return Err(Error::input("ellipsoid matrix must be symmetric"));
        }
        let eig = matrix.clone().symmetric_eigen();
        let min = eig.eigenvalues.min();
        if !(min > 1e-12 * scale) {
            return Err(Error::input(format!("ellipsoid matrix is not positive definite (min eigenvalue {min:e})")));
        }
        let inverse = matrix.clone().try_inverse().ok_or_else(|| Error::input("ellipsoid matrix is singular"))?;
        let det = eig.eigenvalues.product();
        Ok(Ellipsoid { matrix, inverse, det })
    }

    pub fn ball(n: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::input("ball radius must be positive"));
        }
        Self::new(DMatrix::identity(n, n) * radius)
    }

    pub fn axes(semi_axes: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(semi_axes)))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn support(&self, x: &[f64]) -> f64 {
        (&self.matrix * DVector::from_column_slice(x)).norm()
    }

    pub fn gauge(&self, y: &[f64]) -> f64 {
        (&self.inverse * DVector::from_column_slice(y)).norm()
    }

    /// A^{-2} y / |A^{-1} y|.
    pub fn gauge_gradient(&self, y: &[f64]) -> Vec<f64> {
        let a_inv_y = &self.inverse * DVector::from_column_slice(y);
        let len = a_inv_y.norm();
        (&self.inverse * a_inv_y / len).iter().copied().collect()
    }

    pub fn volume(&self) -> f64 {
        self.det * ball_volume(self.dim())
    }

    /// φK, re-expressed with the symmetric square root of φAAᵀφᵀ.
    pub fn linear_image(&self, map: &LinearMap) -> Result<Self> {
        if map.dim() != self.dim() {
            return Err(Error::input("linear map dimension does not match the body"));
        }
        let m = map.matrix() * &self.matrix;
        let gram = &m * m.transpose();
        let eig = gram.symmetric_eigen();
        let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let sqrt = &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose();
        Self::new((&sqrt + sqrt.transpose()) * 0.5)
    }
}

/// The ℓ_q ball of radius r in R^n, 1 <= q < ∞.
#[derive(Clone, Debug, PartialEq)]
pub struct LqBall {
    dim: usize,
    q: f64,
    radius: f64,
}

impl LqBall {
    pub fn new(dim: usize, q: f64, radius: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::input("l_q ball needs n >= 2"));
        }
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::input(format!("l_q ball needs finite q >= 1, got {q} (use a cube for q = inf)")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::input("l_q ball radius must be positive"));
        }
        Ok(LqBall { dim, q, radius })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn q_norm(&self, y: &[f64]) -> f64 {
        let big = y.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if big == 0.0 {
            return 0.0;
        }
        big * y.iter().map(|x| (x.abs() / big).powf(self.q)).sum::<f64>().powf(1.0 / self.q)
    }

    pub fn gauge(&self, y: &[f64]) -> f64 {
        self.q_norm(y) / self.radius
    }

    /// r‖x‖_{q*} with 1/q + 1/q* = 1.
    pub fn support(&self, x: &[f64]) -> f64 {
        if self.q == 1.0 {
            return self.radius * x.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        }
        let dual = LqBall { dim: self.dim, q: self.q / (self.q - 1.0), radius: 1.0 };
        self.radius * dual.q_norm(x)
    }

    pub fn gauge_gradient(&self, y: &[f64]) -> (Vec<f64>, bool) {
        if self.q == 1.0 {
            let tied = y.iter().any(|t| t.abs() <= RIDGE_TIE);
            let grad = y
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    let t = if t.abs() <= RIDGE_TIE { t + RIDGE_TIE * jitter_direction(i) } else { t };
                    t.signum() / self.radius
                })
                .collect();
            return (grad, tied);
        }
        let norm = self.q_norm(y);
        let grad = y
            .iter()
            .map(|&t| t.signum() * (t.abs() / norm).powf(self.q - 1.0) / self.radius)
            .collect();
        (grad, false)
    }

    /// (2rΓ(1+1/q))^n / Γ(1+n/q).
    pub fn volume(&self) -> f64 {
        let n = self.dim as f64;
        (2.0 * self.radius * gamma(1.0 + 1.0 / self.q)).powf(n) / gamma(1.0 + n / self.q)
    }
}

/// A star body K ⊂ R^n about the origin.
#[derive(Clone, Debug, PartialEq)]
pub enum StarBody {
    Polytope(Polytope),
    Ellipsoid(Ellipsoid),
    LqBall(LqBall),
    Table(RadialTable),
    /// φK for a base body without an exact mapped representation.
    Image { base: Box<StarBody>, map: LinearMap },
}

impl StarBody {
    pub fn ball(n: usize, radius: f64) -> Result<Self> {
        Ok(StarBody::Ellipsoid(Ellipsoid::ball(n, radius)?))
    }

    pub fn cube(n: usize, half_width: f64) -> Result<Self> {
        Ok(StarBody::Polytope(Polytope::cube(n, half_width)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            StarBody::Polytope(p) => p.dim(),
            StarBody::Ellipsoid(e) => e.dim(),
            StarBody::LqBall(b) => b.dim(),
            StarBody::Table(t) => t.dim(),
            StarBody::Image { map, .. } => map.dim(),
        }
    }

    pub fn is_convex(&self) -> bool {
        match self {
            StarBody::Table(_) => false,
            StarBody::Image { base, .. } => base.is_convex(),
            _ => true,
        }
    }

    /// Whether boundary elements are exact (facet sums) rather than
    /// quadrature.
    pub fn has_exact_boundary(&self) -> bool {
        matches!(self, StarBody::Polytope(_) | StarBody::Table(_))
    }

    pub fn describe(&self) -> String {
        match self {
            StarBody::Polytope(p) => format!("polytope(n={}, {} facets)", p.dim(), p.facets().len()),
            StarBody::Ellipsoid(e) => format!("ellipsoid(n={})", e.dim()),
            StarBody::LqBall(b) => format!("lq_ball(n={}, q={}, r={})", b.dim(), b.q(), b.radius()),
            StarBody::Table(t) => format!("radial_table(n={}, level={})", t.dim(), t.level()),
            StarBody::Image { base, .. } => format!("linear_image({})", base.describe()),
        }
    }

    /// The gauge p_K(y) = inf{λ > 0 : y ∈ λK}.
    pub fn gauge(&self, y: &[f64]) -> f64 {
        match self {
            StarBody::Polytope(p) => p.gauge(y),
            StarBody::Ellipsoid(e) => e.gauge(y),
            StarBody::LqBall(b) => b.gauge(y),
            StarBody::Table(t) => t.gauge(y),
            StarBody::Image { base, map } => {
                base.gauge(map.apply_inverse(&DVector::from_column_slice(y)).as_slice())
            }
        }
    }

    /// ρ_K(θ) for a unit vector θ.
    pub fn radial(&self, theta: &[f64]) -> Result<f64> {
        if theta.len() != self.dim() {
            return Err(Error::input(format!("direction in R^{} for a body in R^{}", theta.len(), self.dim())));
        }
        let g = self.gauge(theta);
        if g > 0.0 && g.is_finite() {
            Ok(1.0 / g)
        } else {
            Err(Error::geometry(format!("ray {theta:?} does not leave the body through a boundary point")))
        }
    }

    /// ∇p_K(θ) (0-homogeneous), with a flag when θ lies on a ridge and a
    /// jittered direction was used.
    pub fn gauge_gradient(&self, theta: &[f64]) -> (Vec<f64>, bool) {
        match self {
            StarBody::Polytope(p) => p.gauge_gradient(theta),
            StarBody::Ellipsoid(e) => (e.gauge_gradient(theta), false),
            StarBody::LqBall(b) => b.gauge_gradient(theta),
            StarBody::Table(t) => t.gauge_gradient(theta),
            StarBody::Image { base, map } => {
                let pre = map.apply_inverse(&DVector::from_column_slice(theta));
                let (g, tied) = base.gauge_gradient(pre.as_slice());
                let grad = map.inverse().tr_mul(&DVector::from_vec(g));
                (grad.iter().copied().collect(), tied)
            }
        }
    }

    /// h_K(x); only defined for convex bodies.
    pub fn support(&self, x: &[f64]) -> Result<f64> {
        match self {
            StarBody::Polytope(p) => Ok(p.support(x)),
            StarBody::Ellipsoid(e) => Ok(e.support(x)),
            StarBody::LqBall(b) => Ok(b.support(x)),
            StarBody::Table(_) => Err(Error::geometry("support function of a radial table is not defined")),
            StarBody::Image { base, map } => {
                base.support(map.matrix().tr_mul(&DVector::from_column_slice(x)).as_slice())
            }
        }
    }

    /// V_n(K) by the exact path: facet sums or closed forms.
    pub fn volume(&self) -> Estimate {
        let (value, method) = match self {
            StarBody::Polytope(p) => (p.volume(), "facet-exact"),
            StarBody::Ellipsoid(e) => (e.volume(), "closed-form"),
            StarBody::LqBall(b) => (b.volume(), "closed-form"),
            StarBody::Table(t) => (t.volume(), "facet-exact"),
            StarBody::Image { base, map } => (map.abs_det() * base.volume().value, "closed-form"),
        };
        Estimate::exact(value, method)
    }

    /// (1/n) ∫_{S^{n-1}} ρ_K^n by quadrature.
    pub fn radial_volume(&self, rule: &SphereRule) -> Result<Estimate> {
        let n = self.dim();
        if rule.dim() != n {
            return Err(Error::input("rule dimension does not match the body"));
        }
        Ok(rule.integrate_with(|t| Ok(self.radial(t)?.powi(n as i32)))?.scale(1.0 / n as f64))
    }

    /// Boundary elements: exact facets for polytopes and radial tables,
    /// otherwise a product-Gauss rule on S^{n-1} at `inner.level` pushed to
    /// ∂K, with the next coarser level as a companion set.
    pub fn boundary(&self, inner: &RuleSpec) -> Result<BoundarySet> {
        match self {
            StarBody::Polytope(p) => Ok(p.boundary()),
            StarBody::Table(t) => t.boundary(),
            _ => {
                if inner.kind != RuleKind::Gauss {
                    return Err(Error::input("boundary elements of curved bodies need a gauss inner rule"));
                }
                let rule = SphereRule::new(self.dim(), inner)?;
                let elements = self.pushforward(&rule)?;
                let coarse = rule.coarse().map(|c| self.pushforward(c)).transpose()?;
                Ok(BoundarySet { elements, coarse, exact: false, method: format!("boundary-quadrature {}", rule.describe()) })
            }
        }
    }

    /// z = ρθ, ν = ∇p/|∇p|, c = 1/|∇p|, w = ω ρ^n |∇p|.
    fn pushforward(&self, rule: &SphereRule) -> Result<Vec<BoundaryElement>> {
        let n = self.dim();
        rule.nodes()
            .map(|(theta, omega)| {
                let rho = self.radial(theta)?;
                let (grad, _) = self.gauge_gradient(theta);
                let len = super::norm(&grad);
                if !(len > 0.0 && len.is_finite()) {
                    return Err(Error::geometry(format!("gauge gradient vanishes at {theta:?}")));
                }
                Ok(BoundaryElement {
                    point: DVector::from_iterator(n, theta.iter().map(|t| rho * t)),
                    normal: DVector::from_iterator(n, grad.iter().map(|g| g / len)),
                    weight: omega * rho.powi(n as i32) * len,
                    cosine: 1.0 / len,
                })
            })
            .collect()
    }

    pub fn linear_image(&self, map: &LinearMap) -> Result<Self> {
        if map.dim() != self.dim() {
            return Err(Error::input("linear map dimension does not match the body"));
        }
        Ok(match self {
            StarBody::Polytope(p) => StarBody::Polytope(p.linear_image(map)?),
            StarBody::Ellipsoid(e) => StarBody::Ellipsoid(e.linear_image(map)?),
            StarBody::Table(t) => StarBody::Table(t.linear_image(map)?),
            StarBody::LqBall(_) => StarBody::Image { base: Box::new(self.clone()), map: map.clone() },
            StarBody::Image { base, map: inner } => {
                StarBody::Image { base: base.clone(), map: map.compose(inner) }
            }
        })
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        self.linear_image(&LinearMap::scaling(self.dim(), factor)?)
    }

    /// Exact min_θ ρ_K(θ) where available: the smallest facet distance of a
    /// polytope or the smallest semi-axis of an ellipsoid.
    pub fn inradius(&self) -> Option<f64> {
        match self {
            StarBody::Polytope(p) => Some(p.facets().iter().map(|f| f.offset).fold(f64::INFINITY, f64::min)),
            StarBody::Ellipsoid(e) => Some(e.matrix().clone().symmetric_eigen().eigenvalues.min()),
            StarBody::LqBall(b) => {
                let n = b.dim() as f64;
                Some(if b.q() >= 2.0 { b.radius() } else { b.radius() * n.powf(0.5 - 1.0 / b.q()) })
            }
            _ => None,
        }
    }

    /// min over facets / nodes of the radial function, a cheap inradius
    /// proxy used by fixture generators.
    pub fn min_radial(&self, rule: &SphereRule) -> Result<f64> {
        if let StarBody::Polytope(p) = self {
            return Ok(p.facets().iter().map(|f| f.offset).fold(f64::INFINITY, f64::min));
        }
        let mut min = f64::INFINITY;
        for (theta, _) in rule.nodes() {
            min = min.min(self.radial(theta)?);
        }
        Ok(min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gauss(level: u32) -> RuleSpec {
        RuleSpec::gauss(level)
    }

    #[test]
    fn ball_radial_and_volume() {
        let b = StarBody::ball(3, 1.0).unwrap();
        assert!((b.radial(&[0.0, 0.6, 0.8]).unwrap() - 1.0).abs() < 1e-15);
        assert!((b.volume().value - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ellipsoid_volume_two_ways() {
        let e = StarBody::Ellipsoid(Ellipsoid::axes(&[1.0, 2.0, 3.0]).unwrap());
        assert!((e.volume().value - 6.0 * 4.0 * PI / 3.0).abs() < 1e-12);
        let rule = SphereRule::new(3, &gauss(4)).unwrap();
        let radial = e.radial_volume(&rule).unwrap();
        assert!((radial.value - e.volume().value).abs() < 1e-6 * e.volume().value);
        let bset = e.boundary(&gauss(4)).unwrap();
        assert!((bset.volume(3) - e.volume().value).abs() < 1e-6 * e.volume().value);
    }

    #[test]
    fn disk_boundary_elements() {
        let disk = StarBody::ball(2, 1.0).unwrap();
        let bset = disk.boundary(&gauss(2)).unwrap();
        let total: f64 = bset.elements.iter().map(|e| e.weight).sum();
        assert!((total - 2.0 * PI).abs() < 1e-12);
        assert!(bset.elements.iter().all(|e| (e.cosine - 1.0).abs() < 1e-14));
        assert!(bset.coarse.is_some());
    }

    #[test]
    fn gauge_radial_duality() {
        let bodies = [
            StarBody::Ellipsoid(Ellipsoid::axes(&[0.5, 2.0]).unwrap()),
            StarBody::LqBall(LqBall::new(2, 3.0, 1.5).unwrap()),
            StarBody::cube(2, 1.0).unwrap(),
        ];
        let y = [0.3f64, -1.7];
        let len = (y[0] * y[0] + y[1] * y[1]).sqrt();
        for b in &bodies {
            let rho = b.radial(&[y[0] / len, y[1] / len]).unwrap();
            assert!((b.gauge(&y) * rho - len).abs() < 1e-12);
        }
    }

    #[test]
    fn lq_volume_and_support() {
        let l1 = LqBall::new(2, 1.0, 1.0).unwrap();
        assert!((l1.volume() - 2.0).abs() < 1e-12);
        assert!((l1.support(&[0.3, -0.8]) - 0.8).abs() < 1e-15);
        let l2 = LqBall::new(3, 2.0, 2.0).unwrap();
        assert!((l2.volume() - 8.0 * 4.0 * PI / 3.0).abs() < 1e-9);
        assert!((l2.support(&[3.0, 4.0, 0.0]) - 10.0).abs() < 1e-12);
        let l4 = StarBody::LqBall(LqBall::new(2, 4.0, 1.0).unwrap());
        let rule = SphereRule::new(2, &gauss(5)).unwrap();
        let radial = l4.radial_volume(&rule).unwrap();
        assert!((radial.value - l4.volume().value).abs() < 1e-8);
    }

    #[test]
    fn linear_image_radial_law() {
        let map = LinearMap::from_rows(2, &[1.2, 0.4, -0.3, 0.9]).unwrap();
        let bodies = [
            StarBody::Ellipsoid(Ellipsoid::axes(&[0.5, 2.0]).unwrap()),
            StarBody::LqBall(LqBall::new(2, 3.0, 1.5).unwrap()),
            StarBody::cube(2, 1.0).unwrap(),
        ];
        let theta = [0.6, 0.8];
        let pre = map.apply_inverse(&DVector::from_column_slice(&theta));
        let len = pre.norm();
        let dir: Vec<f64> = pre.iter().map(|x| x / len).collect();
        for b in &bodies {
            let image = b.linear_image(&map).unwrap();
            let expected = b.radial(&dir).unwrap() / len;
            assert!((image.radial(&theta).unwrap() - expected).abs() < 1e-10, "{}", b.describe());
            let vol = image.volume().value;
            assert!((vol - map.abs_det() * b.volume().value).abs() < 1e-10);
        }
    }

    #[test]
    fn scaled_ball_has_radius_two() {
        let b = StarBody::ball(2, 1.0).unwrap().scaled(2.0).unwrap();
        assert!((b.radial(&[0.0, 1.0]).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn non_spd_matrix_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(Ellipsoid::new(m), Err(Error::Input(_))));
    }
}
