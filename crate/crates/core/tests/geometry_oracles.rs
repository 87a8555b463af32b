use std::f64::consts::PI;

use muskat_core::constraint::{solve_first_modes, ConstraintProblem};
use muskat_core::geometry::{enclosed_area, length_bounds, length_from_theta, reconstruct_curve};
use muskat_core::quad::GaussLegendre;
use muskat_core::{BubbleState, Complex64, SpectralField};
use proptest::prelude::*;

/// θ supported on 1 ≤ k ≤ 5 with ‖θ‖_{F^{1/2,1}} = size; not necessarily a closed curve.
fn open_theta(raw: &[(f64, f64)], size: f64) -> SpectralField {
    let mut th = SpectralField::zeros(8);
    for (i, (re, im)) in raw.iter().enumerate() {
        th.set_coeff(i as i64 + 1, Complex64::new(*re, *im));
    }
    th.scale(size / th.wiener_norm(0.5, None))
}

/// θ supported on 2 ≤ k ≤ 6 with ‖θ‖_{F^{0,1}} = size < 0.11, first modes solved from the constraint.
fn closed_theta(raw: &[(f64, f64)], size: f64) -> SpectralField {
    let mut th = SpectralField::zeros(8);
    for (i, (re, im)) in raw.iter().enumerate() {
        th.set_coeff(i as i64 + 2, Complex64::new(*re, *im));
    }
    let th = th.scale(size / th.wiener_norm(0.0, None));
    let p = ConstraintProblem::new(th.clone(), 0.11).unwrap();
    solve_first_modes(&p, 1e-14, 60).unwrap().assemble(&th)
}

fn raw_modes() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 5)
        .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
}

fn tangent(th: &SpectralField, mean_angle: f64, a: f64) -> Complex64 {
    Complex64::from_polar(1.0, a + mean_angle + th.eval(a))
}

/// Q = Im ∫∫_{0}^{α} conj(E(η))E(α) dη dα by nested Gauss–Legendre.
fn area_double_integral(th: &SpectralField, mean_angle: f64) -> f64 {
    let rule = GaussLegendre::new(20);
    let q: f64 = rule.panels(-PI, PI, 24, |a| {
        let inner: Complex64 = rule.panels(0.0, a, 12, |e| tangent(th, mean_angle, e).conj());
        (inner * tangent(th, mean_angle, a)).im
    });
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn length_matches_double_integral(raw in raw_modes(), size in 0.01f64..0.3, m in -3.0f64..3.0, r in 0.5f64..2.0) {
        let th = open_theta(&raw, size);
        let q = area_double_integral(&th, m);
        let want = 2.0 * PI * r / (q / (2.0 * PI)).sqrt();
        let got = length_from_theta(&th, m, r).unwrap();
        prop_assert!((got - want).abs() < 1e-10 * want);
    }

    #[test]
    fn length_invariances(raw in raw_modes(), size in 0.005f64..0.1, m in -3.0f64..3.0, c in -3.0f64..3.0) {
        // Translation in α moves z(0); the area is independent of it only for closed curves.
        let th = closed_theta(&raw, size);
        let base = length_from_theta(&th, 0.0, 1.0).unwrap();
        prop_assert!((length_from_theta(&th, m, 1.0).unwrap() - base).abs() < 1e-12);
        let mut shifted = th.clone();
        for k in 1..=8i64 {
            shifted.set_coeff(k, th.coeff(k) * Complex64::from_polar(1.0, k as f64 * c));
        }
        prop_assert!((length_from_theta(&shifted, 0.0, 1.0).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn area_is_pi_r_squared(raw in raw_modes(), size in 0.01f64..0.3, r in 0.5f64..2.0) {
        let th = open_theta(&raw, size);
        let st = BubbleState::new(th, 0.4, r, Complex64::new(1.0, 2.0)).unwrap();
        let area = enclosed_area(&st).unwrap();
        prop_assert!((area - PI * r * r).abs() < 1e-8 * PI * r * r);
    }

    #[test]
    fn area_matches_green_on_curve(raw in raw_modes(), size in 0.005f64..0.1) {
        let th = closed_theta(&raw, size);
        let st = BubbleState::new(th.clone(), -0.7, 1.0, Complex64::new(0.0, 0.0)).unwrap();
        let g = 64;
        let pts = reconstruct_curve(&st, g).unwrap();
        let s = st.length / (2.0 * PI);
        // ½∮(x dy − y dx) with z_α = (L/2π)E from direct evaluation of θ.
        let h = 2.0 * PI / g as f64;
        let mut acc = 0.0;
        for (j, z) in pts.iter().enumerate() {
            let a = -PI + j as f64 * h;
            let dz = s * tangent(&th, st.mean_angle, a);
            acc += 0.5 * (z.re * dz.im - z.im * dz.re) * h;
        }
        prop_assert!((acc - PI).abs() < 1e-10);
    }

    #[test]
    fn length_inside_envelope(raw in raw_modes(), size in 0.005f64..0.2, r in 0.5f64..2.0) {
        let th = open_theta(&raw, size);
        prop_assume!(th.wiener_norm(0.0, None) < 0.25);
        let l = length_from_theta(&th, 0.0, r).unwrap();
        let (lo, hi) = length_bounds(th.wiener_norm(0.0, None), r).unwrap();
        prop_assert!(lo <= l && l <= hi);
    }

    #[test]
    fn curve_matches_direct_integration(raw in raw_modes(), size in 0.01f64..0.3) {
        let th = open_theta(&raw, size);
        let base = Complex64::new(0.3, -0.4);
        let st = BubbleState::new(th.clone(), 0.2, 1.0, base).unwrap();
        let g = 256;
        let pts = reconstruct_curve(&st, g).unwrap();
        let s = st.length / (2.0 * PI);
        let rule = GaussLegendre::new(20);
        for j in [0usize, 41, 128, 211] {
            let a = -PI + j as f64 * 2.0 * PI / g as f64;
            let w: Complex64 = rule.panels(0.0, a, 8, |e| tangent(&th, st.mean_angle, e));
            prop_assert!((pts[j] - (base + s * w)).norm() < 1e-11);
        }
    }
}

#[test]
fn envelope_guard() {
    let guard = 0.5 * (1.0 + 2.0 / PI).ln();
    assert!(length_bounds(0.99 * guard, 1.0).is_some());
    assert!(length_bounds(guard, 1.0).is_none());
    let (lo, hi) = length_bounds(0.0, 1.0).unwrap();
    assert_eq!((lo, hi), (2.0 * PI, 2.0 * PI));
}
