use std::collections::BTreeMap;

use proptest::prelude::*;
use qes_core::basis::solve_uv;
use qes_core::catalog::{verified_variant, Catalog, Instance, Variant, DEFAULT_SEED};
use qes_core::error::QesError;
use qes_core::scalar::{q, Rational, Scalar};
use qes_core::spectrum::{
    basis_relations, closure_residual, exact_eigenvalues, fock_crosscheck, gaps_decreasing, qes_spectrum,
    relation_terms,
};

fn instance(id: &str, n: usize, free: &[(&str, Rational)]) -> Instance {
    let cat = Catalog::builtin();
    let fam = cat.family(id).unwrap();
    let free: BTreeMap<String, Rational> = free.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    fam.instantiate(n, &free, verified_variant(fam)).unwrap()
}

fn s0_1() -> Instance {
    instance("S0-1", 1, &[("a_0m", q(1, 1)), ("a_00", q(1, 1)), ("a_0", q(0, 1))])
}

#[test]
fn single_function_row_matches_truncated_spectrum() {
    let inst = s0_1();
    let spec = qes_spectrum(&inst.coeffs, &inst.params).unwrap();
    let root = 17f64.sqrt();
    let expected = [(13.0 - 4.0 * root) / 16.0, (13.0 + 4.0 * root) / 16.0];
    for (z, e) in spec.eigenvalues.iter().zip(expected) {
        assert!((z.re - e).abs() < 1e-12 && z.im == 0.0);
    }
    let m = fock_crosscheck(&inst.coeffs, &inst.params, &spec, &[100, 200, 400]).unwrap();
    let last = m.last().unwrap();
    assert!(last.gaps.as_ref().unwrap().iter().all(|g| *g < 1e-6));
    assert!(gaps_decreasing(&m));
    // Even beta: the subspace lives in the even-parity block.
    assert!(last.parities.as_ref().unwrap().iter().all(|p| *p == 0));
    assert!(last.eigen_residuals.iter().all(|r| *r < 1e-8));
}

#[test]
fn closure_and_negative_control() {
    let inst = s0_1();
    assert!(closure_residual(&inst.coeffs, &inst.params, 400).unwrap() < 1e-8);
    let bumped = inst.coeffs.perturb(&q(1, 10));
    assert!(closure_residual(&bumped, &inst.params, 400).unwrap() > 1e-3);
    assert!(matches!(qes_spectrum(&bumped, &inst.params), Err(QesError::CutoffViolated(_))));
}

#[test]
fn dependent_basis_functions_obey_exact_relations() {
    let cat = Catalog::builtin();
    let fam = cat.family("H-19").unwrap();
    let inst = fam.sample(2, 1, DEFAULT_SEED, Variant::Printed).pop().unwrap();
    let rel = basis_relations(&inst.params).unwrap();
    assert!(rel.rank() < inst.params.dim());
    // The relations are found on relation_terms coefficients; check them far beyond.
    let len = relation_terms(inst.params.n) + 60;
    let (u, v) = solve_uv::<Rational>(&inst.params, len).unwrap();
    let funcs: Vec<_> = qes_core::basis::level_vectors(&inst.params, &u, &v).into_iter().flatten().collect();
    let top = funcs.iter().map(|f| f.max_power()).min().unwrap();
    for (j, c) in &rel.dependent {
        let mut g = funcs[*j].truncate(top);
        for (k, &piv) in rel.pivots.iter().enumerate() {
            g = g.combine(&funcs[piv].truncate(top), -c[k].clone());
        }
        assert!(g.is_zero(), "dependent {j}");
    }
    let spec = qes_spectrum(&inst.coeffs, &inst.params).unwrap();
    assert_eq!(spec.eigenvalues.len(), rel.rank());
}

fn rat() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=6).prop_map(|(a, b)| q(a, b))
}

fn nonzero() -> impl Strategy<Value = Rational> {
    (1i64..=9, 1i64..=6, any::<bool>()).prop_map(|(a, b, s)| q(if s { a } else { -a }, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rescaling_the_basis_leaves_eigenvalues(entries in proptest::collection::vec(rat(), 16), d in proptest::collection::vec(nonzero(), 4)) {
        let a: Vec<Vec<Rational>> = entries.chunks(4).map(|r| r.to_vec()).collect();
        let b: Vec<Vec<Rational>> = (0..4)
            .map(|i| (0..4).map(|j| a[i][j].clone() * d[j].clone() / d[i].clone()).collect())
            .collect();
        let ea = exact_eigenvalues(&a);
        let eb = exact_eigenvalues(&b);
        let scale = 1.0 + a.iter().flatten().map(|x| x.to_f64().abs()).fold(0.0, f64::max);
        for (x, y) in ea.iter().zip(&eb) {
            prop_assert!((x - y).norm() <= 1e-10 * scale, "{x} vs {y}");
        }
    }
}
