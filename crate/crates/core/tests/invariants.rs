//! Property-based checks of the library's invariants on seeded random
//! fixtures.

use affcap::bodies::{LinearMap, QBody, StarBody};
use affcap::config::matrix_from_rows;
use affcap::functionals::{cap_lower, cap_upper, phi, Rules};
use affcap::projection::ProjectionBody;
use affcap::quadrature::{RuleSpec, SphereRule};
use affcap::verify::{check_property, random_body, random_map, random_polytope, random_q, shell_energy_convergence, trial_rng, VerifyOptions};
use nalgebra::DVector;
use proptest::prelude::*;

fn vec_in(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, dim)
}

fn cheap_rules() -> Rules {
    Rules::gauss(2, 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn q_support_is_sublinear(seed in any::<u64>(), m in 1usize..=3, t in 0.01..10.0f64, x in vec_in(3), y in vec_in(3)) {
        let mut rng = trial_rng(seed, 0);
        let q = random_q(&mut rng, m);
        let (x, y) = (&x[..m], &y[..m]);
        let scaled: Vec<f64> = x.iter().map(|v| t * v).collect();
        let sum: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        let hx = q.support(x).unwrap();
        prop_assert!((q.support(&scaled).unwrap() - t * hx).abs() <= 1e-12 * (1.0 + t * hx.abs()));
        prop_assert!(q.support(&sum).unwrap() <= hx + q.support(y).unwrap() + 1e-12);
        prop_assert!(hx + q.support(&x.iter().map(|v| -v).collect::<Vec<_>>()).unwrap() >= 0.0);
    }

    #[test]
    fn gauge_radial_duality(seed in any::<u64>(), n in 2usize..=3, y in vec_in(3)) {
        let y = &y[..n];
        let len = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(len > 1e-6);
        let k = random_body(&mut trial_rng(seed, 1), n).build().unwrap();
        let theta: Vec<f64> = y.iter().map(|v| v / len).collect();
        let product = k.gauge(y) * k.radial(&theta).unwrap();
        prop_assert!((product - len).abs() <= 1e-9 * len, "{product} vs {len}");
    }

    #[test]
    fn linear_image_radial_law(seed in any::<u64>(), n in 2usize..=3, y in vec_in(3)) {
        let y = &y[..n];
        prop_assume!(y.iter().map(|v| v * v).sum::<f64>() > 1e-6);
        let mut rng = trial_rng(seed, 2);
        let k = random_body(&mut rng, n).build().unwrap();
        let map = LinearMap::new(matrix_from_rows(&random_map(&mut rng, n)).unwrap()).unwrap();
        let image = k.linear_image(&map).unwrap();
        let pre = map.apply_inverse(&DVector::from_column_slice(y));
        let expected = k.gauge(pre.as_slice());
        prop_assert!((image.gauge(y) - expected).abs() <= 1e-9 * expected.max(1e-12));
    }

    #[test]
    fn projection_symmetry_transfer(seed in any::<u64>(), n in 2usize..=3, m in 1usize..=2, u in vec_in(6)) {
        let u = &u[..n * m];
        let mut rng = trial_rng(seed, 3);
        let k = random_polytope(&mut rng, n).build().unwrap();
        let q = random_q(&mut rng, m);
        let p = [1.0, 1.5][(seed % 2) as usize];
        let plus = ProjectionBody::new(&k, &q, p, &RuleSpec::gauss(2)).unwrap();
        let minus = ProjectionBody::new(&k, &q.negated(), p, &RuleSpec::gauss(2)).unwrap();
        let neg_u: Vec<f64> = u.iter().map(|v| -v).collect();
        let (a, b) = (minus.h(u), plus.h(&neg_u));
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn polytope_volume_two_ways(seed in any::<u64>(), n in 2usize..=3) {
        let k = random_polytope(&mut trial_rng(seed, 4), n).build().unwrap();
        let exact = k.volume().value;
        let rule = SphereRule::new(n, &RuleSpec::gauss(5)).unwrap();
        let radial = k.radial_volume(&rule).unwrap();
        prop_assert!((radial.value - exact).abs() <= 3.0 * radial.err + 1e-9, "{radial:?} vs {exact}");
    }

    #[test]
    fn capacity_bounds_are_affinely_covariant(seed in any::<u64>(), n in 2usize..=3, m in 1usize..=2) {
        let mut rng = trial_rng(seed, 5);
        let k = random_polytope(&mut rng, n).build().unwrap();
        let q = random_q(&mut rng, m);
        let map = LinearMap::new(matrix_from_rows(&random_map(&mut rng, n)).unwrap()).unwrap();
        let image = k.linear_image(&map).unwrap();
        let p = 1.5;
        let factor = map.abs_det().powf((n as f64 - p) / n as f64);
        let rules = cheap_rules();
        let lo = cap_lower(&k, &q, p, &rules).unwrap();
        let lo_img = cap_lower(&image, &q, p, &rules).unwrap();
        prop_assert!((lo_img.value - factor * lo.value).abs() <= 1e-9 * lo_img.value);
        let hi = cap_upper(&k, &q, p, &rules).unwrap();
        let hi_img = cap_upper(&image, &q, p, &rules).unwrap();
        let tol = 3.0 * hi_img.err.hypot(factor * hi.err) + 1e-6;
        prop_assert!((hi_img.value - factor * hi.value).abs() <= tol);
    }

    #[test]
    fn ball_bounds_collapse(n in 2usize..=3, seed in any::<u64>()) {
        let q = random_q(&mut trial_rng(seed, 6), 1);
        let p = if n == 2 { 1.5 } else { 2.0 };
        let ball = StarBody::ball(n, 1.0).unwrap();
        let rules = cheap_rules();
        let lo = cap_lower(&ball, &q, p, &rules).unwrap();
        let hi = cap_upper(&ball, &q, p, &rules).unwrap();
        prop_assert!((hi.value - lo.value).abs() <= lo.combined_err(&hi) + 1e-12);
    }

    #[test]
    fn phi_is_symmetric_in_q_for_polygons(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 7);
        let k = random_polytope(&mut rng, 2).build().unwrap();
        let q = random_q(&mut rng, 1);
        let rules = Rules::gauss(4, 0);
        let a = phi(&k, &q, 1.5, &rules).unwrap();
        let b = phi(&k, &q.negated(), 1.5, &rules).unwrap();
        prop_assert!((a.value - b.value).abs() <= 3.0 * a.combined_err(&b) + 1e-6);
    }
}

#[test]
fn shell_factor_matches_closed_form_for_balls() {
    let eps = [0.05, 0.25, 1.0, 2.0];
    for n in [2usize, 3] {
        let ball = StarBody::ball(n, 1.0).unwrap();
        let q = QBody::segment(-0.5, 0.5).unwrap();
        let table = shell_energy_convergence(&ball, &q, &eps, &Rules::gauss(3, 0)).unwrap();
        for (row, e) in table.rows.iter().zip(eps) {
            let analytic = ((1.0 + e).powi(n as i32) - 1.0) / (n as f64 * e);
            assert!((row.ratio - analytic).abs() <= 1e-9 * analytic, "n={n} ε={e}: {} vs {analytic}", row.ratio);
        }
    }
}

#[test]
fn property_reports_reproduce_bit_exactly() {
    let opts = VerifyOptions::new(4, 99);
    for name in ["phi-affine", "two-formula-agreement"] {
        let a = serde_json::to_string(&check_property(name, &opts).unwrap()).unwrap();
        let b = serde_json::to_string(&check_property(name, &opts).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn unknown_property_is_an_error() {
    assert!(check_property("no-such-property", &VerifyOptions::new(1, 0)).is_err());
}

/// For Q = [-1/2, 1/2] on B_2^3, h_Π(u)^p = 2^{-p}|u|^p ∫_{S^2} |ν_1|^p dν
/// = 2^{-p}|u|^p·4π/(p+1), which gives d_{3,p} in closed form.
#[test]
fn d_3p_segment_matches_closed_form() {
    let q = QBody::segment(-0.5, 0.5).unwrap();
    let rules = Rules::gauss(5, 0);
    let four_pi = 4.0 * std::f64::consts::PI;
    for p in [1.0, 1.001, 1.01, 1.1, 1.5, 2.0] {
        let expected = four_pi.powf(-p / 3.0) * 2f64.powf(-p) / (p + 1.0);
        let d = affcap::projection::d_np(&q, 3, p, &rules.inner, &rules.outer).unwrap();
        assert!((d.value - expected).abs() <= 3.0 * d.err + 1e-9 * expected, "p={p}: {d:?} vs {expected}");
    }
}
