use muskat_core::spectral::{forward_transform, grid_points, inverse_transform};
use muskat_core::{AnalyticWeight, Complex64, SpectralField};
use proptest::prelude::*;

fn field(n: usize) -> impl Strategy<Value = SpectralField> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n + 1).prop_map(|v| {
        SpectralField::from_nonnegative(
            v.into_iter()
                .enumerate()
                .map(|(k, (re, im))| Complex64::new(re, im) / (1.0 + k as f64))
                .collect(),
        )
    })
}

fn mean_free(n: usize) -> impl Strategy<Value = SpectralField> {
    field(n).prop_map(|mut f| {
        f.set_coeff(0, Complex64::new(0.0, 0.0));
        f
    })
}

/// Product of fields without truncation: storage grows to the sum of the bands.
fn product(fs: &[SpectralField]) -> SpectralField {
    let total: usize = fs.iter().map(SpectralField::n_modes).sum();
    fs.iter()
        .skip(1)
        .fold(fs[0].with_modes(total), |acc, f| acc.convolve(&f.with_modes(total)))
}

fn b(n: usize, s: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else {
        (n as f64).powf(s - 1.0)
    }
}

proptest! {
    #[test]
    fn transform_round_trip(f in field(12), extra in 0usize..4) {
        let g = 2 * (13 + extra);
        let back = forward_transform(&inverse_transform(&f, g).unwrap(), 12).unwrap();
        prop_assert!((&back - &f).wiener_norm(0.0, None) < 1e-12);
    }

    #[test]
    fn samples_match_pointwise_evaluation(f in field(7)) {
        let g = 32;
        let s = inverse_transform(&f, g).unwrap();
        for (a, v) in grid_points(g).into_iter().zip(s) {
            prop_assert!((f.eval(a) - v).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_product_inequality(fs in prop::collection::vec(field(6), 2..4)) {
        let lhs = product(&fs).wiener_norm(0.0, None);
        let rhs: f64 = fs.iter().map(|f| f.wiener_norm(0.0, None)).product();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn s_product_inequality(fs in prop::collection::vec(field(6), 2..4), s in 0.1f64..2.5) {
        let n = fs.len();
        let lhs = product(&fs).wiener_norm(s, None);
        let mut rhs = 0.0;
        for j in 0..n {
            let mut term = fs[j].wiener_norm(s, None);
            for (k, f) in fs.iter().enumerate() {
                if k != j {
                    term *= f.wiener_norm(0.0, None);
                }
            }
            rhs += term;
        }
        prop_assert!(lhs <= b(n, s) * rhs * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn weighted_product_inequality(fs in prop::collection::vec(field(5), 2..3), nu0 in 0.0f64..0.5, t in 0.0f64..3.0) {
        let w = AnalyticWeight::new(nu0, t).unwrap();
        // ‖·‖_{F^{0,1}_ν} adds the k = 0 term to the weighted tail.
        let full = |f: &SpectralField| f.wiener_norm(0.0, Some(&w));
        let lhs = full(&product(&fs));
        let rhs: f64 = fs.iter().map(full).product();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn interpolation_inequality(f in mean_free(10), s1 in 0.0f64..1.0, s2 in 1.0f64..3.0, sigma in 0.0f64..=1.0) {
        let s = (1.0 - sigma) * s1 + sigma * s2;
        let lhs = f.wiener_norm(s, None);
        // Homogeneous norm at s1 = 0 leaves out k = 0; f is mean-free so both agree.
        let rhs = f.wiener_norm(s1, None).powf(1.0 - sigma) * f.wiener_norm(s2, None).powf(sigma);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn embedding_for_mean_free(f in mean_free(10), s1 in 0.0f64..2.0, ds in 0.0f64..2.0) {
        prop_assert!(f.wiener_norm(s1, None) <= f.wiener_norm(s1 + ds, None) * (1.0 + 1e-12));
    }

    #[test]
    fn operators_preserve_reality(f in field(8), g in field(8)) {
        // Storage of k >= 0 only means reality holds iff the mean stays real.
        for h in [f.hilbert(), f.lambda_pow(0.5), f.derivative(3), f.mean_free_antiderivative(), f.truncate(3), f.convolve(&g)] {
            prop_assert_eq!(h.coeff(0).im, 0.0);
            prop_assert_eq!(h.coeff(-2), h.coeff(2).conj());
        }
    }

    #[test]
    fn hilbert_squares_to_minus_identity(f in mean_free(9)) {
        let hh = f.hilbert().hilbert();
        prop_assert!((&hh + &f).wiener_norm(0.0, None) < 1e-14);
    }

    #[test]
    fn antiderivative_inverts_derivative(f in field(9)) {
        let a = f.mean_free_antiderivative();
        prop_assert!(a.eval(0.0).abs() < 1e-13);
        let mut want = f.clone();
        want.set_coeff(0, Complex64::new(0.0, 0.0));
        prop_assert!((&a.derivative(1) - &want).wiener_norm(0.0, None) < 1e-13);
    }

    #[test]
    fn serde_round_trip(f in field(5)) {
        let s = serde_json::to_string(&f).unwrap();
        let back: SpectralField = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, f);
    }
}
