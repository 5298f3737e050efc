use proptest::prelude::*;
use qes_core::basis::gaussian_series;
use qes_core::error::QesError;
use qes_core::fock::{bargmann_to_fock, build_generators, commutator_residuals, MIN_TRUNCATION};
use qes_core::scalar::q;
use qes_core::scalar::{Rational, Scalar};
use qes_core::series::BargmannSeries;

#[test]
fn float_generators_agree_with_rational() {
    let exact = build_generators::<Rational>(40).unwrap();
    let float = build_generators::<f64>(40).unwrap();
    let r = commutator_residuals(&float);
    assert!(r.r1 < 1e-12 && r.r2 < 1e-12 && r.casimir < 1e-12);
    for i in 0..36 {
        for j in 0..36 {
            // Rational entries carry the sqrt-free metric; compare squares.
            let a = exact.k0.get(i, j).to_f64();
            let b = float.k0.get(i, j);
            assert!((a - b).abs() < 1e-12, "K0[{i}][{j}]");
        }
    }
}

#[test]
fn number_operator_diagonal() {
    let g = build_generators::<f64>(20).unwrap();
    for n in 0..20 {
        assert!((g.k0.get(n, n) - (2 * n + 1) as f64 / 4.0).abs() < 1e-13);
    }
}

#[test]
fn truncation_below_minimum_is_rejected() {
    assert_eq!(
        build_generators::<f64>(MIN_TRUNCATION - 1).unwrap_err(),
        QesError::TruncationTooSmall { got: MIN_TRUNCATION - 1, min: MIN_TRUNCATION }
    );
}

#[test]
fn monomial_amplitude_is_sqrt_factorial() {
    let f = bargmann_to_fock(&BargmannSeries::<Rational>::monomial(5, 20), 10).unwrap();
    assert!((f.amps[5] - 120f64.sqrt()).abs() < 1e-12);
    assert!(f.amps.iter().enumerate().all(|(k, a)| k == 5 || *a == 0.0));
}

#[test]
fn gaussian_norm_matches_closed_form() {
    // ||exp(c z^2)||^2 = sum (2m)!/(m!)^2 c^(2m) = 1/sqrt(1 - 4c^2).
    let c = q(1, 4);
    let f = bargmann_to_fock(&gaussian_series(&c, 400), 400).unwrap();
    let expected = 1.0 / (1.0 - 4.0 * 0.0625f64).sqrt();
    assert!((f.norm_sq - expected).abs() < 1e-12, "{}", f.norm_sq);
    assert!(!f.diverging());
}

#[test]
fn wide_gaussian_is_flagged() {
    let f = bargmann_to_fock(&gaussian_series(&q(3, 5), 400), 400).unwrap();
    assert!(f.diverging());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn algebra_is_exact_at_any_truncation(m in MIN_TRUNCATION..48usize) {
        let r = commutator_residuals(&build_generators::<Rational>(m).unwrap());
        prop_assert!(r.r1.is_zero() && r.r2.is_zero() && r.casimir.is_zero());
    }
}
