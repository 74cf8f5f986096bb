//! Finite-ε shell energies for p = 1.
//!
//! The test function f_ε = 1 - dist(x, K)/ε has ∇f_ε = -v/ε on the shell
//! {0 < dist(x, K) < ε}, where v is the outer normal at the nearest boundary
//! point. Parametrizing the shell by x = π(v) + t·v turns
//! ∫ h_Q(∇f_εᵀu) dx into a weighted sum of h_Q(-vᵀu) over normals v, which
//! is evaluated with the same machinery as the projection body.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bodies::{complement_basis, BoundaryElement, Ellipsoid, Polytope, QBody, StarBody};
use crate::error::{Error, Result};
use crate::functionals::Rules;
use crate::projection::ProjectionBody;
use crate::quadrature::{Estimate, RuleKind, SphereRule};
use crate::special::gauss_legendre;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellRow {
    pub epsilon: f64,
    pub energy: Estimate,
    /// energy / Φ_{1,Q}(K)
    pub ratio: f64,
    /// ((1+ε)^n - 1)/(nε), reported for the unit ball only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic_factor: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellTable {
    pub phi: Estimate,
    pub rows: Vec<ShellRow>,
}

fn element(normal: DVector<f64>, weight: f64) -> BoundaryElement {
    BoundaryElement { point: DVector::zeros(normal.len()), normal: -normal, weight, cosine: 1.0 }
}

/// ∫_0^ε det(M + tI) dt, exact for the degree n-1 polynomial.
fn radial_jacobian(m: &DMatrix<f64>, eps: f64) -> f64 {
    let k = m.nrows();
    let (nodes, weights) = gauss_legendre(k + 1);
    nodes
        .iter()
        .zip(&weights)
        .map(|(x, w)| {
            let t = 0.5 * eps * (x + 1.0);
            let shifted = m + DMatrix::identity(k, k) * t;
            0.5 * eps * w * shifted.determinant()
        })
        .sum()
}

/// Shell elements of an ellipsoid, parametrized by the Gauss map: the
/// boundary point with normal v is ∇h_K(v) and the shell volume element is
/// det(D²h_K(v)|_{v⊥} + tI) dv dt.
fn ellipsoid_shell(e: &Ellipsoid, rule: &SphereRule, eps: f64) -> Vec<BoundaryElement> {
    let a2 = e.matrix() * e.matrix();
    rule.nodes()
        .map(|(v, omega)| {
            let v = DVector::from_column_slice(v);
            let g = &a2 * &v;
            let h = (e.matrix() * &v).norm();
            let hess = (&a2 - &g * g.transpose() / (h * h)) / h;
            let basis = complement_basis(&v);
            let b = DMatrix::from_columns(&basis);
            let m = b.transpose() * hess * &b;
            element(v, omega * radial_jacobian(&m, eps) / eps)
        })
        .collect()
}

/// Shell elements of a polytope (n = 2, 3): facet slabs, edge wedges and
/// vertex caps. Vertex normal cones tile the sphere, so the caps together
/// contribute ε^n/n times a full-sphere integral.
fn polytope_shell(poly: &Polytope, rule: &SphereRule, arc_nodes: usize, eps: f64) -> Result<Vec<BoundaryElement>> {
    let n = poly.dim();
    if n > 3 {
        return Err(Error::input("polytope shells are implemented for n <= 3"));
    }
    let mut out: Vec<BoundaryElement> = poly
        .facets()
        .iter()
        .map(|f| element(DVector::from_column_slice(&f.normal), f.measure))
        .collect();
    if n == 3 {
        let (gl_x, gl_w) = gauss_legendre(arc_nodes);
        let scale = poly.vertices().iter().map(|v| crate::bodies::norm(v)).fold(0.0, f64::max);
        let facets = poly.facets();
        for i in 0..facets.len() {
            for j in i + 1..facets.len() {
                let on = |f: &crate::bodies::Facet, v: &[f64]| {
                    (crate::bodies::dot(&f.normal, v) - f.offset).abs() <= 1e-9 * scale.max(1.0)
                };
                let shared: Vec<&Vec<f64>> =
                    poly.vertices().iter().filter(|v| on(&facets[i], v) && on(&facets[j], v)).collect();
                if shared.len() < 2 {
                    continue;
                }
                let mut length: f64 = 0.0;
                for a in &shared {
                    for b in &shared {
                        let d: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
                        length = length.max(d);
                    }
                }
                let n1 = DVector::from_column_slice(&facets[i].normal);
                let n2 = DVector::from_column_slice(&facets[j].normal);
                let cos = n1.dot(&n2).clamp(-1.0, 1.0);
                let alpha = cos.acos();
                let w = (&n2 - &n1 * cos).normalize();
                for (x, wt) in gl_x.iter().zip(&gl_w) {
                    let phi = 0.5 * alpha * (x + 1.0);
                    let v = &n1 * phi.cos() + &w * phi.sin();
                    out.push(element(v, length * 0.5 * alpha * wt * eps / 2.0));
                }
            }
        }
    }
    let cap = eps.powi(n as i32 - 1) / n as f64;
    out.extend(rule.nodes().map(|(v, omega)| element(DVector::from_column_slice(v), omega * cap)));
    Ok(out)
}

fn shell_elements(k: &StarBody, rule: &SphereRule, arc_nodes: usize, eps: f64) -> Result<Vec<BoundaryElement>> {
    match k {
        StarBody::Ellipsoid(e) => Ok(ellipsoid_shell(e, rule, eps)),
        StarBody::Polytope(p) => polytope_shell(p, rule, arc_nodes, eps),
        _ => Err(Error::input("shell energies need a convex polytope or an ellipsoid")),
    }
}

fn is_unit_ball(k: &StarBody) -> bool {
    match k {
        StarBody::Ellipsoid(e) => {
            let n = e.dim();
            (e.matrix() - DMatrix::identity(n, n)).amax() < 1e-14
        }
        _ => false,
    }
}

/// Shell energies (∫_{S^{nm-1}} (∫ h_Q(∇f_εᵀu) dx)^{-nm} du)^{-1/(nm)} for
/// each ε, next to the limit Φ_{1,Q}(K).
pub fn shell_energy_convergence(k: &StarBody, q: &QBody, epsilons: &[f64], rules: &Rules) -> Result<ShellTable> {
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::input(format!("shell width must be positive, got {e}")));
    }
    if rules.inner.kind != RuleKind::Gauss {
        return Err(Error::input("shell energies need a gauss inner rule"));
    }
    let n = k.dim();
    let rule = SphereRule::new(n, &rules.inner)?;
    let level = rules.inner.level;
    let phi = ProjectionBody::new(k, q, 1.0, &rules.inner)?.phi(&rules.outer)?;
    let rows = epsilons
        .iter()
        .map(|&eps| {
            let fine = shell_elements(k, &rule, 4 << level, eps)?;
            let coarse = match rule.coarse() {
                Some(c) => Some(shell_elements(k, c, 4 << level.saturating_sub(1), eps)?),
                None => None,
            };
            let body = ProjectionBody::from_elements(
                n,
                q,
                1.0,
                &fine,
                coarse.as_deref(),
                format!("shell eps={eps} {}", rule.describe()),
            )?;
            let energy = body.phi(&rules.outer)?;
            let analytic_factor =
                is_unit_ball(k).then(|| ((1.0 + eps).powi(n as i32) - 1.0) / (n as f64 * eps));
            Ok(ShellRow { epsilon: eps, ratio: energy.value / phi.value, energy, analytic_factor })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShellTable { phi, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg() -> QBody {
        QBody::segment(-0.5, 0.5).unwrap()
    }

    #[test]
    fn disk_shell_factor() {
        let disk = StarBody::ball(2, 1.0).unwrap();
        let t = shell_energy_convergence(&disk, &seg(), &[1.0, 0.1], &Rules::gauss(4, 0)).unwrap();
        assert!((t.rows[0].ratio - 1.5).abs() < 1e-10);
        assert!((t.rows[1].ratio - 1.05).abs() < 1e-10);
        assert_eq!(t.rows[0].analytic_factor, Some(1.5));
    }

    #[test]
    fn ellipsoid_shell_volumes() {
        let rule = SphereRule::new(3, &crate::quadrature::RuleSpec::gauss(5)).unwrap();
        let ball = Ellipsoid::ball(3, 2.0).unwrap();
        let eps = 0.3;
        let vol: f64 = ellipsoid_shell(&ball, &rule, eps).iter().map(|x| x.weight).sum::<f64>() * eps;
        let exact = 4.0 / 3.0 * std::f64::consts::PI * ((2.0 + eps).powi(3) - 8.0);
        assert!((vol - exact).abs() < 1e-10 * exact);

        // as ε → 0 the weights integrate the surface area
        let e = Ellipsoid::axes(&[1.0, 2.0, 0.5]).unwrap();
        let surface = crate::functionals::sp_surface(
            &StarBody::Ellipsoid(e.clone()),
            1.0,
            &crate::quadrature::RuleSpec::gauss(5),
        )
        .unwrap();
        let lead: f64 = ellipsoid_shell(&e, &rule, 1e-6).iter().map(|x| x.weight).sum();
        assert!((lead - surface.value).abs() < 1e-4 * surface.value);
    }

    #[test]
    fn cube_shell_decreases_to_phi() {
        let cube = StarBody::cube(3, 1.0).unwrap();
        let t = shell_energy_convergence(&cube, &seg(), &[0.5, 0.1, 0.02], &Rules::gauss(3, 0)).unwrap();
        let ratios: Vec<f64> = t.rows.iter().map(|r| r.ratio).collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
        assert!(ratios[2] > 1.0 && ratios[2] < 1.05);
    }

    #[test]
    fn square_shell_matches_minkowski_perimeter() {
        // for the square and h_Q ≡ const the shell integral is the area of
        // the ε-collar: 8ε + πε²
        let square = Polytope::cube(2, 1.0).unwrap();
        let rule = SphereRule::new(2, &crate::quadrature::RuleSpec::gauss(3)).unwrap();
        for eps in [0.1, 1.0] {
            let els = polytope_shell(&square, &rule, 8, eps).unwrap();
            let area: f64 = els.iter().map(|x| x.weight).sum::<f64>() * eps;
            assert!((area - (8.0 * eps + std::f64::consts::PI * eps * eps)).abs() < 1e-12);
        }
        let cube = Polytope::cube(3, 1.0).unwrap();
        let rule = SphereRule::new(3, &crate::quadrature::RuleSpec::gauss(3)).unwrap();
        let eps = 0.4;
        let els = polytope_shell(&cube, &rule, 8, eps).unwrap();
        let vol: f64 = els.iter().map(|x| x.weight).sum::<f64>() * eps;
        let steiner = 24.0 * eps + 12.0 * 2.0 * std::f64::consts::FRAC_PI_4 * eps * eps
            + 4.0 / 3.0 * std::f64::consts::PI * eps.powi(3);
        assert!((vol - steiner).abs() < 1e-10, "{vol} {steiner}");
    }
}
