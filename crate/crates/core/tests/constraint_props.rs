use muskat_core::constraint::{g_map, MAX_RADIUS};
use muskat_core::{ci_constant, solve_first_modes, Complex64, ConstraintProblem, SpectralField};
use proptest::prelude::*;

fn tilde(norm: f64) -> impl Strategy<Value = SpectralField> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..10).prop_map(move |v| {
        let mut f = SpectralField::zeros(12);
        for (i, (a, b)) in v.into_iter().enumerate() {
            f.set_coeff(i as i64 + 2, Complex64::new(a, b) / (1.0 + i as f64));
        }
        let cur = f.wiener_norm(0.0, None);
        f.scale(norm / cur.max(1e-12))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn iteration_contracts(t in tilde(0.09)) {
        let p = ConstraintProblem::new(t.clone(), 0.1).unwrap();
        let s = solve_first_modes(&p, 1e-14, 60).unwrap();
        for w in s.updates.windows(2) {
            if w[0] > 1e-13 {
                prop_assert!(w[1] < w[0], "{:?}", s.updates);
            }
        }
        let g = g_map(&t, s.x);
        prop_assert!(g[0].hypot(g[1]) < 1e-14);
    }

    #[test]
    fn solution_is_continuous(t in tilde(0.06), d in tilde(1.0), h in 1e-6f64..1e-4) {
        let p0 = ConstraintProblem::new(t.clone(), 0.1).unwrap();
        let p1 = ConstraintProblem::new(&t + &d.scale(h), 0.1).unwrap();
        let x0 = solve_first_modes(&p0, 1e-15, 80).unwrap().x;
        let x1 = solve_first_modes(&p1, 1e-15, 80).unwrap().x;
        let dx = (x1[0] - x0[0]).hypot(x1[1] - x0[1]);
        // |δx| ≤ C_I(r)·r·‖δθ̃‖ by the same estimate as the frequency relation.
        prop_assert!(dx <= ci_constant(0.1).unwrap() * 0.1 * h);
    }

    #[test]
    fn frequency_relation(t in tilde(0.08), r in 0.085f64..0.11) {
        prop_assume!(r < MAX_RADIUS);
        let p = ConstraintProblem::new(t.clone(), r).unwrap();
        let s = solve_first_modes(&p, 1e-14, 60).unwrap();
        let first = 2.0 * s.x[0].hypot(s.x[1]);
        prop_assert!(first <= ci_constant(r).unwrap() * r * t.wiener_norm(0.0, None));
    }
}

#[test]
fn g_linear_part_at_origin() {
    // g(0, (ε, 0)) = (0, 2πε) + O(ε²).
    let u = SpectralField::zeros(8);
    let eps = 1e-7;
    let g = g_map(&u, [eps, 0.0]);
    assert!(g[0].abs() < 1e-12);
    assert!((g[1] - 2.0 * std::f64::consts::PI * eps).abs() < 1e-12);
}
