use proptest::prelude::*;
use qes_core::basis::SubspaceParams;
use qes_core::catalog::Catalog;
use qes_core::cutoff::{cutoff_residuals, identity_obs_check, CONDITION_NAMES};
use qes_core::model::HamiltonianCoeffs;
use qes_core::scalar::{q, Rational, Scalar};
use std::collections::BTreeMap;

fn s0_1(n: usize) -> qes_core::catalog::Instance {
    let free: BTreeMap<String, Rational> =
        [("a_0m", q(1, 1)), ("a_00", q(1, 1)), ("a_0", q(0, 1))].map(|(k, v)| (k.to_string(), v)).into();
    let cat = Catalog::builtin();
    cat.family("S0-1").unwrap().instantiate(n, &free, qes_core::catalog::Variant::Printed).unwrap()
}

#[test]
fn catalog_row_satisfies_every_condition() {
    for n in 0..4 {
        let inst = s0_1(n);
        let exact = cutoff_residuals::<Rational>(&inst.coeffs, &inst.params);
        assert!(exact.satisfied());
        assert!(exact.blocks().iter().all(|b| b.is_zero()));
        assert!(cutoff_residuals::<f64>(&inst.coeffs, &inst.params).satisfied());
    }
}

#[test]
fn raising_term_breaks_the_top_condition() {
    let inst = s0_1(1);
    let mut h = inst.coeffs.clone();
    h.a_p += q(1, 10);
    let rep = cutoff_residuals::<Rational>(&h, &inst.params);
    assert_eq!(rep.violated(), vec!["D1(N)"]);
    // K+ raises z^(2N) u with coefficient 1/2.
    assert_eq!(*rep.blocks()[1].get(0, 0), q(1, 20));
    assert_eq!(CONDITION_NAMES[1], "D1(N)");
}

fn rat() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=6).prop_map(|(a, b)| q(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn diagonal_difference_identity(c in proptest::array::uniform8(rat()), s in proptest::array::uniform6(rat()), n in 0usize..5) {
        let mut h = HamiltonianCoeffs::from_array(c);
        h.a_mm = q(0, 1);
        let p = SubspaceParams::spin_half(s[0].clone(), s[1].clone(), s[2].clone(), s[3].clone(), s[4].clone(), s[5].clone(), n);
        let chk = identity_obs_check::<Rational>(&h, &p).unwrap();
        prop_assert!(chk.identity.is_zero());
        prop_assert!(chk.identity_closed_form.is_zero());
        prop_assert!(chk.d1_block.is_zero());
        prop_assert!(chk.d2_block.is_zero());
    }

    #[test]
    fn float_and_exact_residuals_agree(c in proptest::array::uniform8(rat()), s in proptest::array::uniform6(rat()), n in 0usize..4) {
        let h = HamiltonianCoeffs::from_array(c);
        let p = SubspaceParams::spin_half(s[0].clone(), s[1].clone(), s[2].clone(), s[3].clone(), s[4].clone(), s[5].clone(), n);
        let exact = cutoff_residuals::<Rational>(&h, &p);
        let float = cutoff_residuals::<f64>(&h, &p);
        for (a, b) in exact.blocks().iter().zip(float.blocks()) {
            for (ra, rb) in a.rows().iter().zip(b.rows()) {
                for (x, y) in ra.iter().zip(rb) {
                    prop_assert!((x.to_f64() - y).abs() <= 1e-9 * (1.0 + x.to_f64().abs()));
                }
            }
        }
    }
}
