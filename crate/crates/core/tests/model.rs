use proptest::prelude::*;
use qes_core::model::{assemble_fock, hermitian_check, HamiltonianCoeffs};
use qes_core::scalar::{q, Rational};

fn rat() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=6).prop_map(|(a, b)| q(a, b))
}

fn coeffs() -> impl Strategy<Value = HamiltonianCoeffs> {
    proptest::array::uniform8(rat()).prop_map(HamiltonianCoeffs::from_array)
}

#[test]
fn hermitian_pairs() {
    let h = HamiltonianCoeffs::from_ints([1, 1, 2, 3, 3, 4, 5, 5]);
    assert!(hermitian_check(&h).hermitian);
    let h = HamiltonianCoeffs::from_ints([1, 0, 2, 3, 1, 4, 5, 5]);
    let c = hermitian_check(&h);
    assert!(!c.hermitian);
    assert_eq!(c.violations.len(), 2);
}

#[test]
fn hermitian_model_is_symmetric_in_the_interior() {
    let h = HamiltonianCoeffs::from_ints([1, 1, -2, 3, 3, 4, 5, 5]);
    assert!(assemble_fock::<f64>(&h, 60).unwrap().interior_self_adjoint(4, 1e-9));
    let h = HamiltonianCoeffs::from_ints([1, 0, -2, 3, 3, 4, 5, 5]);
    assert!(!assemble_fock::<f64>(&h, 60).unwrap().interior_self_adjoint(4, 1e-9));
}

#[test]
fn linear_k0_term_is_diagonal() {
    let h = HamiltonianCoeffs::from_ints([0, 0, 0, 0, 0, 2, 0, 0]);
    let op = assemble_fock::<f64>(&h, 30).unwrap();
    for n in 0..26 {
        assert!((op.get(n, n) - (2 * n + 1) as f64 / 2.0).abs() < 1e-14);
        assert_eq!(op.get(n, n + 2), 0.0);
    }
}

#[test]
fn json_accepts_rationals_and_defaults() {
    let h = HamiltonianCoeffs::from_json_str(r#"{"a_00": "1/3", "a_0": 2, "a_m": "-0.25"}"#).unwrap();
    assert_eq!(h.a_00, q(1, 3));
    assert_eq!(h.a_0, q(2, 1));
    assert_eq!(h.a_m, q(-1, 4));
    assert_eq!(h.a_pp, q(0, 1));
    assert!(HamiltonianCoeffs::from_json_str(r#"{"a_00": "x"}"#).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn perturbation_preserves_hermiticity(h in coeffs(), t in rat()) {
        let mut h = h;
        h.a_mm = h.a_pp.clone();
        h.a_m = h.a_p.clone();
        h.a_p0 = h.a_0m.clone();
        prop_assert!(hermitian_check(&h.perturb(&t)).hermitian);
    }

    #[test]
    fn json_round_trip(h in coeffs()) {
        let text = serde_json::to_string(&h).unwrap();
        prop_assert_eq!(HamiltonianCoeffs::from_json_str(&text).unwrap(), h);
    }
}
