use qes_core::catalog::{
    fixtures, verified_variant, verify_family, Catalog, FamilyStatus, Variant, VerifyOptions, DEFAULT_SEED,
};
use qes_core::error::QesError;
use qes_core::scalar::q;

#[test]
fn every_family_verifies_exactly() {
    let cat = Catalog::builtin();
    let opts = VerifyOptions { samples: 2, ..Default::default() };
    for fam in &cat.families {
        let report = verify_family(fam, &opts);
        assert_ne!(report.status, FamilyStatus::Fail, "{}", fam.id);
        let expected_erratum = ["S0-4", "S0-5", "H-14", "H-24"].contains(&fam.id.as_str());
        assert_eq!(report.status == FamilyStatus::Erratum, expected_erratum, "{}", fam.id);
    }
}

#[test]
fn printed_erratum_rows_report_residual_blocks() {
    let cat = Catalog::builtin();
    let fam = cat.family("S0-4").unwrap();
    let report = verify_family(fam, &VerifyOptions { depths: vec![1], samples: 1, ..Default::default() });
    let printed = &report.variants[0];
    assert_eq!(printed.variant, Variant::Printed);
    let bad = &printed.instances[0];
    assert!(!bad.passed);
    assert!(bad.residuals.contains_key("D2"));
    assert!(report.variants[1].passed);
}

#[test]
fn perturbed_coefficients_fail() {
    let cat = Catalog::builtin();
    let opts =
        VerifyOptions { depths: vec![0, 2], samples: 2, perturb: Some(q(1, 10)), ..Default::default() };
    for id in ["S0-1", "H-9", "H-27"] {
        let fam = cat.family(id).unwrap();
        let v = verify_family(fam, &opts);
        assert_eq!(v.status, FamilyStatus::Fail, "{id}");
    }
}

#[test]
fn fixtures_satisfy_the_cutoff() {
    let opts = VerifyOptions::default();
    for n in 0..=3 {
        let fx = fixtures(n).unwrap();
        assert_eq!(fx.len(), 6);
        for inst in fx {
            let r = qes_core::catalog::check_instance(&inst, opts.exact);
            assert!(r.passed, "{} N={n}: {:?}", inst.family, r.violated);
        }
    }
}

#[test]
fn sampling_is_reproducible_and_seeded() {
    let cat = Catalog::builtin();
    let fam = cat.family("H-9").unwrap();
    let a = fam.sample(2, 3, DEFAULT_SEED, verified_variant(fam));
    let b = fam.sample(2, 3, DEFAULT_SEED, verified_variant(fam));
    let c = fam.sample(2, 3, DEFAULT_SEED + 1, verified_variant(fam));
    assert_eq!(a.len(), 3);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn unknown_ids_and_bad_catalogs_are_rejected() {
    let cat = Catalog::builtin();
    assert_eq!(cat.family("H-99").unwrap_err(), QesError::UnknownFamily("H-99".into()));
    assert!(cat.fixture("trig").is_ok());
    let bad = r#"{"version": 1, "description": "", "fixtures": [], "families": [
        {"id": "X", "kind": "spin-0", "table": "t", "hermitian": true, "free": [],
         "subspace": {"beta": "0", "rho": "0"}, "coeffs": {"a_m": "nope(1)"}}]}"#;
    assert!(Catalog::from_json(bad).is_err());
}
