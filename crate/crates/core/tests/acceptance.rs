//! Acceptance run: one line per criterion, then a single assertion over all
//! of them. Criteria run sequentially so their wall-clock bounds are
//! measured without contention.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use qes_core::basis::{kratzer_form, Seed};
use qes_core::basis::{solve_uv, SpinKind, SubspaceParams};
use qes_core::catalog::{
    fixtures, sample_subspaces, verified_variant, verify_family, Catalog, FamilyStatus, Instance, Variant,
    VerifyOptions, DEFAULT_SEED,
};
use qes_core::cutoff::identity_obs_check;
use qes_core::fock::{build_generators, commutator_residuals, INTERIOR_MARGIN};
use qes_core::model::{hermitian_check, HamiltonianCoeffs};
use qes_core::scalar::{q, Rational, Scalar};
use qes_core::series::BargmannSeries;
use qes_core::spectrum::{
    closure_residual, fock_crosscheck, fock_eigenvectors, gaps_decreasing, qes_spectrum,
};
use qes_core::structure::verify_structure;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CLOSURE_TOL: f64 = 1e-8;
const CONTROL_MIN: f64 = 1e-3;
const GAP_TOL: f64 = 1e-6;
const STRUCTURE_TOL: f64 = 1e-10;
const SERIES_TOL: f64 = 1e-12;
const SERIES_TERMS: usize = 30;
const EIGEN_TOL: f64 = 1e-6;
const FOCK_DIMS: [usize; 3] = [100, 200, 400];
const WEIGHT_CAP: (i64, i64) = (3, 10);

struct Outcome {
    id: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
    budget: Option<Duration>,
}

fn criterion(id: &'static str, budget: Option<u64>, body: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (ok, detail) = body();
    let elapsed = start.elapsed();
    let budget = budget.map(Duration::from_secs);
    let in_time = budget.is_none_or(|b| elapsed < b);
    let out = Outcome { id, passed: ok && in_time, detail, elapsed, budget };
    let limit = out.budget.map(|b| format!(" (budget {}s)", b.as_secs())).unwrap_or_default();
    println!(
        "{} {}: {} [{:.2}s{}]",
        out.id,
        if out.passed { "PASS" } else { "FAIL" },
        out.detail,
        out.elapsed.as_secs_f64(),
        limit
    );
    out
}

fn weight_ok(inst: &Instance) -> bool {
    inst.max_weight() <= q(WEIGHT_CAP.0, WEIGHT_CAP.1)
}

fn ac1() -> (bool, String) {
    let g = build_generators::<Rational>(64).unwrap();
    let r = commutator_residuals(&g);
    let m = g.casimir.dim();
    let diag_ok = (0..m - INTERIOR_MARGIN).all(|i| g.casimir.get(i, i) == q(-3, 16));
    let ok = r.r1.is_zero() && r.r2.is_zero() && r.casimir.is_zero() && diag_ok;
    (
        ok,
        format!(
            "M=64 rational: [K0,K±] residual {}, [K+,K-] residual {}, Casimir residual {}, diagonal -3/16 {}",
            r.r1, r.r2, r.casimir, diag_ok
        ),
    )
}

fn ac2() -> (bool, String) {
    let mut parts = Vec::new();
    let mut ok = true;
    for kind in [SpinKind::Spin0, SpinKind::SpinHalf, SpinKind::Spin1] {
        let sets: Vec<SubspaceParams> =
            (0..=3).flat_map(|n| sample_subspaces(kind, n, 3, DEFAULT_SEED)).collect();
        let worst = sets
            .iter()
            .map(|p| verify_structure(p, 300).map(|r| r.max()).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max);
        ok &= sets.len() >= 10 && worst <= STRUCTURE_TOL;
        parts.push(format!("{} {} sets worst {:.1e}", kind.name(), sets.len(), worst));
    }
    (ok, format!("M=300: {}", parts.join("; ")))
}

fn ac3() -> (bool, String) {
    let cat = Catalog::builtin();
    let opts = VerifyOptions::default();
    let mut printed_fail = Vec::new();
    let mut corrected_fail = Vec::new();
    let mut undersampled = Vec::new();
    let mut checked = 0;
    for fam in &cat.families {
        let report = verify_family(fam, &opts);
        let printed = &report.variants[0];
        checked += printed.instances.len();
        if !printed.undersampled.is_empty() {
            undersampled.push(fam.id.clone());
        }
        if !printed.passed {
            // Candidate erratum: show the full residual block of the first
            // failing instance.
            let bad = printed.instances.iter().find(|i| !i.passed).expect("a failing instance");
            println!("    candidate erratum {} N={} free {:?}", fam.id, bad.n, bad.free);
            for (cond, block) in &bad.residuals {
                println!("      {cond} = {block:?}");
            }
            printed_fail.push(fam.id.clone());
        }
        if report.status == FamilyStatus::Fail {
            corrected_fail.push(fam.id.clone());
        }
    }
    let ok = printed_fail.is_empty() && undersampled.is_empty();
    (
        ok,
        format!(
            "{} families, {checked} printed instances over N=0..3; printed rows with nonzero residual {:?}; \
             failing after recorded corrections {:?}; undersampled {:?}",
            cat.families.len(),
            printed_fail,
            corrected_fail,
            undersampled
        ),
    )
}

fn closure_instances() -> Vec<Instance> {
    let cat = Catalog::builtin();
    let mut out = Vec::new();
    for fam in &cat.families {
        let variant = verified_variant(fam);
        for n in 0..=3 {
            out.extend(fam.sample(n, 3, DEFAULT_SEED, variant).into_iter().filter(weight_ok));
        }
    }
    out
}

fn ac4() -> (bool, String) {
    let instances = closure_instances();
    let mut worst_closure = 0.0f64;
    let mut weakest_control = f64::INFINITY;
    let mut closure_fail = 0;
    let mut control_fail: BTreeMap<String, usize> = BTreeMap::new();
    let bump = q(1, 10);
    for inst in &instances {
        let c = closure_residual(&inst.coeffs, &inst.params, 400).unwrap_or(f64::INFINITY);
        let pc = closure_residual(&inst.coeffs.perturb(&bump), &inst.params, 400).unwrap_or(0.0);
        worst_closure = worst_closure.max(c);
        weakest_control = weakest_control.min(pc);
        closure_fail += usize::from(c > CLOSURE_TOL);
        if pc < CONTROL_MIN {
            *control_fail.entry(inst.family.clone()).or_default() += 1;
        }
    }
    let control_total: usize = control_fail.values().sum();
    let ok = !instances.is_empty() && closure_fail == 0 && control_total == 0;
    (
        ok,
        format!(
            "{} instances with |rho|,|tau| <= 0.3 at M=400: worst closure {:.1e} ({closure_fail} above 1e-8); \
             perturbed control min {:.1e}, {control_total} below 1e-3 {:?}",
            instances.len(),
            worst_closure,
            weakest_control,
            control_fail
        ),
    )
}

fn ac5() -> (bool, String) {
    let cat = Catalog::builtin();
    let a_pp_rows: Vec<&str> =
        cat.families.iter().filter(|f| f.table.contains("a_pp != 0")).map(|f| f.id.as_str()).collect();
    let mut chosen = Vec::new();
    for fam in cat.families.iter().filter(|f| f.hermitian) {
        for n in [1, 2] {
            if let Some(inst) =
                fam.sample(n, 3, DEFAULT_SEED, verified_variant(fam)).into_iter().find(weight_ok)
            {
                chosen.push(inst);
            }
        }
    }
    let mut worst_gap = 0.0f64;
    let mut failures = Vec::new();
    let mut covered: Vec<&str> = Vec::new();
    for inst in &chosen {
        if !hermitian_check(&inst.coeffs).hermitian {
            failures.push(format!("{} not Hermitian", inst.family));
            continue;
        }
        let spec = match qes_spectrum(&inst.coeffs, &inst.params) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("{} N={}: {e}", inst.family, inst.params.n));
                continue;
            }
        };
        match fock_crosscheck(&inst.coeffs, &inst.params, &spec, &FOCK_DIMS) {
            Ok(m) => {
                let g = m.last().and_then(|x| x.gaps.clone()).unwrap_or_default();
                let gmax = g.iter().copied().fold(0.0, f64::max);
                worst_gap = worst_gap.max(gmax);
                if gmax > GAP_TOL || !gaps_decreasing(&m) || g.len() != spec.eigenvalues.len() {
                    failures.push(format!("{} N={} gap {gmax:.1e}", inst.family, inst.params.n));
                } else if let Some(id) = a_pp_rows.iter().find(|id| **id == inst.family) {
                    covered.push(id);
                }
            }
            Err(e) => failures.push(format!("{} N={}: {e}", inst.family, inst.params.n)),
        }
    }
    covered.dedup();
    let missing: Vec<&&str> = a_pp_rows.iter().filter(|id| !covered.contains(id)).collect();
    let ok = chosen.len() >= 10 && failures.is_empty() && missing.is_empty();
    (
        ok,
        format!(
            "{} Hermitian instances, M=100/200/400: worst relative gap at M=400 {:.1e}; \
             a_pp != 0 rows without a passing instance {:?}; failures {:?}",
            chosen.len(),
            worst_gap,
            missing,
            failures
        ),
    )
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Reference Taylor coefficients of `(u, v)` for the closed-form fixtures,
/// indexed by power `0..SERIES_TERMS`.
fn reference(id: &str, omega: f64) -> (Vec<f64>, Vec<f64>) {
    let t = SERIES_TERMS;
    let bessel = |order: usize| -> Vec<f64> {
        (0..t)
            .map(|k| {
                if k < order || (k - order) % 2 == 1 {
                    return 0.0;
                }
                let j = (k - order) / 2;
                let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * 0.5f64.powi(k as i32) / (factorial(j) * factorial(j + order))
            })
            .collect()
    };
    let taylor = |f: &dyn Fn(usize) -> f64| -> Vec<f64> { (0..t).map(f).collect() };
    match id {
        "trig" => (
            taylor(&|k| {
                if k % 2 == 0 {
                    (-1f64).powi((k / 2) as i32) * omega.powi(k as i32) / factorial(k)
                } else {
                    0.0
                }
            }),
            taylor(&|k| {
                if k % 2 == 1 {
                    -(-1f64).powi((k / 2) as i32) * omega.powi(k as i32) / factorial(k)
                } else {
                    0.0
                }
            }),
        ),
        "hyperbolic" => (
            taylor(&|k| if k % 2 == 0 { omega.powi(k as i32) / factorial(k) } else { 0.0 }),
            taylor(&|k| if k % 2 == 1 { omega.powi(k as i32) / factorial(k) } else { 0.0 }),
        ),
        "bessel-0" => (bessel(0), bessel(1)),
        "bessel-1" => (bessel(1), bessel(2)),
        _ => unreachable!(),
    }
}

/// `u = H_n(z sqrt(rho))` up to scale and `v = u' - 2 rho z u` for the
/// oscillator pair with `alpha = 1`.
fn oscillator_reference(level: usize, rho: f64) -> (Vec<f64>, Vec<f64>) {
    // Physicists' Hermite polynomial in y, then y = z sqrt(rho).
    let mut prev = vec![0.0; level + 2];
    let mut cur = vec![0.0; level + 2];
    cur[0] = 1.0;
    for k in 0..level {
        let mut next = vec![0.0; level + 2];
        for m in 0..=k {
            next[m + 1] += 2.0 * cur[m];
            next[m] -= 2.0 * k as f64 * prev[m];
        }
        prev = cur;
        cur = next;
    }
    let mut u = vec![0.0; SERIES_TERMS];
    for (m, c) in cur.iter().enumerate().take(level + 1) {
        u[m] = c * rho.sqrt().powi(m as i32);
    }
    let mut v = vec![0.0; SERIES_TERMS];
    for k in 0..SERIES_TERMS - 1 {
        v[k] += (k + 1) as f64 * u[k + 1];
        v[k + 1] -= 2.0 * rho * u[k];
    }
    (u, v)
}

/// Largest deviation after scaling the reference to the computed series at
/// the reference's leading coefficient.
fn series_error(u: &BargmannSeries<f64>, v: &BargmannSeries<f64>, ru: &[f64], rv: &[f64]) -> f64 {
    let (lead, from_u) = match ru.iter().position(|x| *x != 0.0) {
        Some(k) => (k, true),
        None => (rv.iter().position(|x| *x != 0.0).expect("nonzero reference"), false),
    };
    let scale = if from_u { u.coeff(lead as i64) / ru[lead] } else { v.coeff(lead as i64) / rv[lead] };
    (0..SERIES_TERMS)
        .map(|k| {
            let du = (u.coeff(k as i64) - scale * ru[k]).abs();
            let dv = (v.coeff(k as i64) - scale * rv[k]).abs();
            du.max(dv)
        })
        .fold(0.0, f64::max)
}

fn ac6() -> (bool, String) {
    let cat = Catalog::builtin();
    let mut ok = true;
    let mut parts = Vec::new();
    for (id, omega) in
        [("trig", q(3, 2)), ("hyperbolic", q(2, 3)), ("bessel-0", q(1, 1)), ("bessel-1", q(1, 1))]
    {
        let fam = cat.fixture(id).unwrap();
        let free: BTreeMap<String, Rational> = fam
            .free
            .iter()
            .map(|p| (p.name.clone(), if p.name == "omega" { omega.clone() } else { q(1, 2) }))
            .collect();
        let inst = fam.instantiate(0, &free, Variant::Printed).unwrap();
        let (u, v) = solve_uv::<f64>(&inst.params, SERIES_TERMS + 4).unwrap();
        let (ru, rv) = reference(id, omega.to_f64());
        let err = series_error(&u, &v, &ru, &rv);
        ok &= err <= SERIES_TOL;
        parts.push(format!("{id} {err:.1e}"));
    }
    let rho = q(1, 4);
    for level in 0..=4usize {
        let gamma = -q(2, 1) * rho.clone() * q(level as i64 + 1, 1);
        let seed = if level % 2 == 0 { Seed::U } else { Seed::V };
        let p = SubspaceParams::spin_half(q(1, 1), q(0, 1), gamma, q(0, 1), rho.clone(), q(0, 1), 0)
            .with_seed(seed);
        let (u, v) = solve_uv::<f64>(&p, SERIES_TERMS + 4).unwrap();
        let (ru, rv) = oscillator_reference(level, rho.to_f64());
        let err = series_error(&u, &v, &ru, &rv);
        ok &= err <= SERIES_TOL;
        parts.push(format!("oscillator-{level} {err:.1e}"));
    }
    let mut worst = 0.0f64;
    let mut checked = 0;
    for n in 0..=2 {
        for inst in fixtures(n).unwrap() {
            if !(inst.family == "trig" || inst.family.starts_with("bessel")) {
                continue;
            }
            let res = qes_spectrum(&inst.coeffs, &inst.params)
                .and_then(|s| fock_eigenvectors(&inst.coeffs, &inst.params, &s, 400))
                .map(|e| e.iter().map(|x| x.residual).fold(0.0, f64::max))
                .unwrap_or(f64::INFINITY);
            worst = worst.max(res);
            checked += 1;
        }
    }
    ok &= checked > 0 && worst <= EIGEN_TOL;
    (
        ok,
        format!(
            "series on {SERIES_TERMS} coefficients: {}; trig/Bessel eigen-residual at M=400 over {checked} instances {:.1e}",
            parts.join(", "),
            worst
        ),
    )
}

fn ac7() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let r = |rng: &mut ChaCha8Rng| q(rng.gen_range(-9..=9), rng.gen_range(1..=7));
    let mut obs_fail = 0;
    let mut eps_fail = 0;
    for _ in 0..100 {
        let mut c: [Rational; 8] = std::array::from_fn(|_| r(&mut rng));
        c[1] = q(0, 1);
        let h = HamiltonianCoeffs::from_array(c);
        let n = rng.gen_range(0..=4);
        let p = SubspaceParams::spin_half(
            r(&mut rng),
            r(&mut rng),
            r(&mut rng),
            r(&mut rng),
            r(&mut rng),
            r(&mut rng),
            n,
        );
        let chk = identity_obs_check::<Rational>(&h, &p).unwrap();
        if !(chk.identity.is_zero()
            && chk.identity_closed_form.is_zero()
            && chk.d1_block.is_zero()
            && chk.d2_block.is_zero())
        {
            obs_fail += 1;
        }
        let k = kratzer_form(&p);
        if k.eps_tilde - k.eps != q(2, 1) * (p.rho.clone() - p.tau.clone()) {
            eps_fail += 1;
        }
    }
    (obs_fail == 0 && eps_fail == 0, format!("100 random rational sets: d1 - d4 identity failures {obs_fail}, energy shift failures {eps_fail}"))
}

#[test]
fn acceptance() {
    let outcomes = [
        criterion("AC1", Some(1), ac1),
        criterion("AC2", Some(30), ac2),
        criterion("AC3", Some(60), ac3),
        criterion("AC4", Some(120), ac4),
        criterion("AC5", Some(300), ac5),
        criterion("AC6", None, ac6),
        criterion("AC7", None, ac7),
    ];
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
