use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::hull;
use crate::error::{Error, Result};

/// Largest m for which vertex-list bodies are validated by hull enumeration.
pub const MAX_Q_DIM: usize = 3;

const CONTAINMENT_SLACK: f64 = 1e-12;

/// A convex body Q ⊂ R^m containing the origin (possibly on its boundary),
/// given through its support function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum QBody {
    Polytope { vertices: Vec<Vec<f64>> },
    Segment { a: f64, b: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    /// The body with support (λ h₁^p + (1-λ) h₂^p)^{1/p}.
    LpSum { first: std::boxed::Box<QBody>, second: std::boxed::Box<QBody>, lambda: f64, p: f64 },
}

impl QBody {
    pub fn segment(a: f64, b: f64) -> Result<Self> {
        Self::checked(QBody::Segment { a, b })
    }

    /// [-1/2, 1/2]^m.
    pub fn unit_cube(m: usize) -> Result<Self> {
        Self::checked(QBody::Box { lo: vec![-0.5; m], hi: vec![0.5; m] })
    }

    pub fn axis_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        Self::checked(QBody::Box { lo, hi })
    }

    pub fn polytope(vertices: Vec<Vec<f64>>) -> Result<Self> {
        Self::checked(QBody::Polytope { vertices })
    }

    /// A simplex given by its m+1 vertices.
    pub fn simplex(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let m = vertices.first().map(Vec::len).unwrap_or(0);
        if vertices.len() != m + 1 {
            return Err(Error::input(format!("a simplex in R^{m} needs {} vertices", m + 1)));
        }
        Self::polytope(vertices)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Self::checked(QBody::Ball { center, radius })
    }

    /// Segment whose support p-th power is ((1+τ)/2) t₊^p + ((1-τ)/2) t₋^p.
    pub fn tau_segment(tau: f64, p: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&tau) {
            return Err(Error::input(format!("tau must lie in [-1, 1], got {tau}")));
        }
        if !(p >= 1.0) {
            return Err(Error::input(format!("p must be >= 1, got {p}")));
        }
        Self::segment(-((1.0 - tau) / 2.0).powf(1.0 / p), ((1.0 + tau) / 2.0).powf(1.0 / p))
    }

    /// L_p combination λ·Q1 +_p (1-λ)·Q2.
    pub fn lp_sum(first: &QBody, second: &QBody, lambda: f64, p: f64) -> Result<Self> {
        Self::checked(QBody::LpSum {
            first: std::boxed::Box::new(first.clone()),
            second: std::boxed::Box::new(second.clone()),
            lambda,
            p,
        })
    }

    fn checked(q: QBody) -> Result<Self> {
        q.validate()?;
        Ok(q)
    }

    pub fn dim(&self) -> usize {
        match self {
            QBody::Polytope { vertices } => vertices.first().map(Vec::len).unwrap_or(0),
            QBody::Segment { .. } => 1,
            QBody::Box { lo, .. } => lo.len(),
            QBody::Ball { center, .. } => center.len(),
            QBody::LpSum { first, .. } => first.dim(),
        }
    }

    /// Checks the representation: finite data, full dimension, and the
    /// origin in Q.
    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            QBody::Segment { a, b } => {
                if !(a.is_finite() && b.is_finite()) {
                    return Err(Error::input("segment endpoints must be finite"));
                }
                if !(*a <= 0.0 && 0.0 <= *b && a < b) {
                    return Err(Error::input(format!("segment [{a}, {b}] must satisfy a <= 0 <= b, a < b")));
                }
            }
            QBody::Box { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return Err(Error::input("box bounds must be nonempty and of equal length"));
                }
                if !finite(lo) || !finite(hi) {
                    return Err(Error::input("box bounds must be finite"));
                }
                if lo.iter().zip(hi).any(|(l, h)| !(*l <= 0.0 && 0.0 <= *h && l < h)) {
                    return Err(Error::input("box must satisfy lo <= 0 <= hi, lo < hi in every coordinate"));
                }
            }
            QBody::Ball { center, radius } => {
                if center.is_empty() || !finite(center) || !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::input("ball needs a finite center and positive radius"));
                }
                let dist = super::norm(center);
                if dist > radius * (1.0 + CONTAINMENT_SLACK) {
                    return Err(Error::input("ball does not contain the origin"));
                }
            }
            QBody::Polytope { vertices } => {
                let m = self.dim();
                if m == 0 || vertices.iter().any(|v| v.len() != m) {
                    return Err(Error::input("polytope vertices must share a positive dimension"));
                }
                if vertices.iter().any(|v| !finite(v)) {
                    return Err(Error::input("polytope vertices must be finite"));
                }
                if m > MAX_Q_DIM {
                    return Err(Error::input(format!("vertex-list Q supports m <= {MAX_Q_DIM}")));
                }
                if m == 1 {
                    let lo = vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
                    let hi = vertices.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
                    if !(lo <= 0.0 && 0.0 <= hi && lo < hi) {
                        return Err(Error::input("1-D polytope must contain the origin and have length"));
                    }
                } else {
                    let pts: Vec<DVector<f64>> =
                        vertices.iter().map(|v| DVector::from_column_slice(v)).collect();
                    let facets = hull::facets(&pts).map_err(|e| Error::input(format!("Q: {e}")))?;
                    let scale = vertices.iter().map(|v| super::norm(v)).fold(0.0, f64::max);
                    if facets.iter().any(|f| f.offset < -CONTAINMENT_SLACK * scale) {
                        return Err(Error::input("polytope Q does not contain the origin"));
                    }
                }
            }
            QBody::LpSum { first, second, lambda, p } => {
                first.validate()?;
                second.validate()?;
                if first.dim() != second.dim() {
                    return Err(Error::input("L_p sum of bodies of different dimension"));
                }
                if !(*p >= 1.0) || !p.is_finite() {
                    return Err(Error::input(format!("L_p sum needs p >= 1, got {p}")));
                }
                if !(0.0..=1.0).contains(lambda) {
                    return Err(Error::input(format!("L_p sum needs lambda in [0, 1], got {lambda}")));
                }
            }
        }
        Ok(())
    }

    /// h_Q(x), with a dimension check.
    pub fn support(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::input(format!(
                "support of a body in R^{} evaluated at a vector in R^{}",
                self.dim(),
                x.len()
            )));
        }
        Ok(self.h(x))
    }

    /// h_Q(x) without the dimension check, for inner loops.
    pub fn h(&self, x: &[f64]) -> f64 {
        match self {
            QBody::Segment { a, b } => (a * x[0]).max(b * x[0]),
            QBody::Box { lo, hi } => lo.iter().zip(hi).zip(x).map(|((l, h), t)| (l * t).max(h * t)).sum(),
            QBody::Ball { center, radius } => super::dot(center, x) + radius * super::norm(x),
            QBody::Polytope { vertices } => vertices
                .iter()
                .map(|v| super::dot(v, x))
                .fold(f64::NEG_INFINITY, f64::max),
            QBody::LpSum { first, second, lambda, p } => {
                let h1 = first.h(x);
                let h2 = second.h(x);
                (lambda * h1.powf(*p) + (1.0 - lambda) * h2.powf(*p)).powf(1.0 / p)
            }
        }
    }

    /// -Q.
    pub fn negated(&self) -> Self {
        match self {
            QBody::Segment { a, b } => QBody::Segment { a: -b, b: -a },
            QBody::Box { lo, hi } => QBody::Box {
                lo: hi.iter().map(|x| -x).collect(),
                hi: lo.iter().map(|x| -x).collect(),
            },
            QBody::Ball { center, radius } => {
                QBody::Ball { center: center.iter().map(|x| -x).collect(), radius: *radius }
            }
            QBody::Polytope { vertices } => QBody::Polytope {
                vertices: vertices.iter().map(|v| v.iter().map(|x| -x).collect()).collect(),
            },
            QBody::LpSum { first, second, lambda, p } => QBody::LpSum {
                first: std::boxed::Box::new(first.negated()),
                second: std::boxed::Box::new(second.negated()),
                lambda: *lambda,
                p: *p,
            },
        }
    }

    /// bQ for b > 0.
    pub fn scaled(&self, b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::input(format!("scale factor must be positive, got {b}")));
        }
        let s = |xs: &[f64]| xs.iter().map(|x| x * b).collect::<Vec<_>>();
        Ok(match self {
            QBody::Segment { a, b: hi } => QBody::Segment { a: a * b, b: hi * b },
            QBody::Box { lo, hi } => QBody::Box { lo: s(lo), hi: s(hi) },
            QBody::Ball { center, radius } => QBody::Ball { center: s(center), radius: radius * b },
            QBody::Polytope { vertices } => QBody::Polytope { vertices: vertices.iter().map(|v| s(v)).collect() },
            QBody::LpSum { first, second, lambda, p } => QBody::LpSum {
                first: std::boxed::Box::new(first.scaled(b)?),
                second: std::boxed::Box::new(second.scaled(b)?),
                lambda: *lambda,
                p: *p,
            },
        })
    }

    pub fn describe(&self) -> String {
        match self {
            QBody::Segment { a, b } => format!("segment[{a}, {b}]"),
            QBody::Box { lo, hi } => format!("box({lo:?}, {hi:?})"),
            QBody::Ball { center, radius } => format!("ball(c={center:?}, r={radius})"),
            QBody::Polytope { vertices } => format!("polytope({} vertices)", vertices.len()),
            QBody::LpSum { first, second, lambda, p } => {
                format!("lp_sum(p={p}, lambda={lambda}; {}, {})", first.describe(), second.describe())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_support() {
        let q = QBody::segment(-0.5, 0.5).unwrap();
        assert_eq!(q.support(&[1.0]).unwrap(), 0.5);
        assert_eq!(q.support(&[0.0]).unwrap(), 0.0);
        assert!(matches!(q.support(&[1.0, 2.0]), Err(Error::Input(_))));
    }

    #[test]
    fn square_support_is_vertex_max() {
        let verts = vec![vec![-1.0, -1.0], vec![1.0, -1.0], vec![1.0, 1.0], vec![-1.0, 1.0]];
        let q = QBody::polytope(verts.clone()).unwrap();
        let x = [1.0, 1.0];
        let brute = verts.iter().map(|v| v[0] * x[0] + v[1] * x[1]).fold(f64::MIN, f64::max);
        assert_eq!(q.support(&x).unwrap(), brute);
        assert_eq!(brute, 2.0);
        let b = QBody::axis_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(b.support(&x).unwrap(), 2.0);
    }

    #[test]
    fn lp_sum_examples() {
        let q1 = QBody::segment(0.0, 1.0).unwrap();
        let q2 = QBody::segment(-1.0, 0.0).unwrap();
        let s = QBody::lp_sum(&q1, &q2, 0.5, 1.0).unwrap();
        assert!((s.h(&[1.0]) - 0.5).abs() < 1e-15);
        let one = QBody::lp_sum(&q1, &q2, 1.0, 2.0).unwrap();
        assert_eq!(one.h(&[0.7]), q1.h(&[0.7]));
        let same = QBody::lp_sum(&q1, &q1, 0.3, 3.0).unwrap();
        assert!((same.h(&[0.7]) - q1.h(&[0.7])).abs() < 1e-15);
        assert!(QBody::lp_sum(&q1, &q2, 0.5, 0.5).is_err());
    }

    #[test]
    fn origin_containment_is_checked() {
        assert!(QBody::segment(0.1, 1.0).is_err());
        assert!(QBody::segment(0.0, 1.0).is_ok());
        assert!(QBody::simplex(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).is_ok());
        assert!(QBody::simplex(vec![vec![0.1, 0.1], vec![1.0, 0.0], vec![0.0, 1.0]]).is_err());
        assert!(QBody::ball(vec![2.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn tau_segment_matches_weight() {
        for &(tau, p) in &[(-1.0, 1.0), (0.0, 2.0), (0.5, 1.5)] {
            let q = QBody::tau_segment(tau, p).unwrap();
            for &t in &[-2.0f64, -0.3, 0.7] {
                let direct = (1.0 + tau) / 2.0 * t.max(0.0).powf(p) + (1.0 - tau) / 2.0 * (-t).max(0.0).powf(p);
                assert!((q.h(&[t]).powf(p) - direct).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn negation_and_scaling() {
        let q = QBody::axis_box(vec![-0.2, -1.0], vec![0.5, 0.3]).unwrap();
        let x = [0.4, -0.9];
        assert!((q.negated().h(&x) - q.h(&[-0.4, 0.9])).abs() < 1e-15);
        assert!((q.scaled(3.0).unwrap().h(&x) - 3.0 * q.h(&x)).abs() < 1e-15);
    }

    #[test]
    fn serde_round_trip() {
        let q = QBody::lp_sum(&QBody::segment(-0.5, 0.5).unwrap(), &QBody::segment(0.0, 1.0).unwrap(), 0.25, 2.0)
            .unwrap();
        let text = serde_json::to_string(&q).unwrap();
        assert_eq!(serde_json::from_str::<QBody>(&text).unwrap(), q);
        let seg: QBody = serde_json::from_str(r#"{"type":"segment","a":-0.5,"b":0.5}"#).unwrap();
        assert_eq!(seg, QBody::segment(-0.5, 0.5).unwrap());
    }
}
