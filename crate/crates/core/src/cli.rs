//! Command-line front end. Every subcommand writes one JSON report (to
//! `--json PATH` or stdout) and a short human-readable summary to stderr.
//! Exit codes: 0 pass, 1 verification failure, 2 usage or configuration
//! error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::basis::{fock_basis, require_admissible, solve_uv, SpinKind, SubspaceParams};
use crate::catalog::{
    sample_subspaces, seed_from_env, verified_variant, verify_family, Catalog, FamilyStatus, Instance,
    Variant, VerifyOptions,
};
use crate::cutoff::{cutoff_residuals, CutoffReport, CONDITION_NAMES};
use crate::error::{QesError, Result};
use crate::fock::{build_generators, commutator_residuals, MIN_TRUNCATION};
use crate::model::{hermitian_check, HamiltonianCoeffs};
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};
use crate::spectrum::{closure_residual, fock_crosscheck, gaps_decreasing, qes_spectrum, DEFAULT_FOCK_DIMS};
use crate::structure::{verify_structure, verify_structure_series};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qes",
    version,
    about = "Quasi-exactly solvable quartic Bose Hamiltonians: exact cut-off checks, invariant subspaces and algebraized spectra"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the JSON report to this file instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,

    /// Worker threads (default: all cores)
    #[arg(long, global = true, value_name = "INT")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the sl(2,R) commutators and the Casimir on a truncated Fock space
    VerifyAlgebra {
        /// Fock truncation M
        #[arg(long = "dim", default_value_t = 64)]
        dim: usize,
        /// Rational arithmetic (residuals must vanish exactly)
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = 1e-12)]
        tolerance: f64,
    },
    /// Compare the generator actions on the basis with their structure matrices
    VerifyStructure {
        /// Take subspace parameters from this family's samples instead of random sets
        #[arg(long, value_name = "ID")]
        family: Option<String>,
        /// Spin kinds to sample (default: all three)
        #[arg(long, value_enum)]
        kind: Vec<KindArg>,
        #[arg(long = "N", default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        /// Fock truncation M for the numerical oracle
        #[arg(long = "dim", default_value_t = 300)]
        dim: usize,
        /// Use the exact Taylor-series oracle instead of Fock amplitudes
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// Check the cut-off conditions for every catalog family
    VerifyCatalog {
        #[arg(long, value_name = "ID")]
        family: Option<String>,
        /// A single depth (default: 0, 1, 2, 3)
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long, default_value_t = 3)]
        samples: usize,
        /// Rational arithmetic (residuals must vanish exactly)
        #[arg(long)]
        exact: bool,
        /// Shift a_m and a_p by this fraction of max(|a|, 1) before checking
        #[arg(long, value_name = "FLOAT")]
        perturb: Option<String>,
    },
    /// Cut-off residual blocks for one Hamiltonian and subspace
    Cutoff {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        exact: bool,
    },
    /// Block eigenvalues with truncated-Fock cross-checks and closure residual
    Spectrum {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Ascending Fock truncations
        #[arg(long = "fock-dims", value_delimiter = ',', default_values_t = DEFAULT_FOCK_DIMS)]
        fock_dims: Vec<usize>,
        /// Gap (Hermitian) or eigen-residual (non-Hermitian) bound at the largest truncation
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
    /// Taylor coefficients of u, v and Fock amplitudes of the basis
    BasisDump {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Number of Taylor coefficients and amplitudes to print
        #[arg(long, default_value_t = 30)]
        terms: usize,
        /// Fock truncation used for norms
        #[arg(long = "fock-dim", default_value_t = 400)]
        fock_dim: usize,
        /// Print rationals (u, v) as "p/q" strings
        #[arg(long)]
        exact: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    #[value(name = "spin-0")]
    Spin0,
    #[value(name = "spin-half")]
    SpinHalf,
    #[value(name = "spin-1")]
    Spin1,
}

impl From<KindArg> for SpinKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Spin0 => SpinKind::Spin0,
            KindArg::SpinHalf => SpinKind::SpinHalf,
            KindArg::Spin1 => SpinKind::Spin1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Printed,
    Corrected,
}

/// A Hamiltonian with subspace, from a model file or a catalog family.
#[derive(Clone, Debug, Args)]
pub struct InstanceArgs {
    /// JSON file with "coeffs" and "subspace" objects
    #[arg(long, value_name = "FILE", conflicts_with = "family")]
    pub model: Option<PathBuf>,
    /// Catalog family or fixture id (e.g. S0-1, H-9, trig)
    #[arg(long, value_name = "ID")]
    pub family: Option<String>,
    /// Subspace depth (overrides the model file)
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Free parameter value, NAME=VALUE (VALUE as p/q or decimal); unset ones are sampled
    #[arg(long = "free", value_name = "NAME=VALUE")]
    pub free: Vec<String>,
    /// Printed row or recorded correction (default: the variant that verifies)
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
}

#[derive(serde::Deserialize)]
struct ModelFile {
    coeffs: HamiltonianCoeffs,
    subspace: Option<SubspaceParams>,
}

fn config(msg: impl Into<String>) -> QesError {
    QesError::Config(msg.into())
}

fn read_model(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config(format!("{}: {e}", path.display())))
}

fn parse_free(items: &[String]) -> Result<BTreeMap<String, Rational>> {
    items
        .iter()
        .map(|item| {
            let (k, v) =
                item.split_once('=').ok_or_else(|| config(format!("expected NAME=VALUE, got `{item}`")))?;
            Ok((k.trim().to_string(), parse_rational(v.trim())?))
        })
        .collect()
}

/// Resolves the instance and the family it came from (if any).
fn resolve(args: &InstanceArgs, seed: u64) -> Result<Instance> {
    if let Some(path) = &args.model {
        let file = read_model(path)?;
        let mut params = file.subspace.ok_or_else(|| config("model file has no \"subspace\" object"))?;
        if let Some(n) = args.n {
            params.n = n;
        }
        return Ok(Instance {
            family: path.display().to_string(),
            variant: Variant::Printed,
            free: BTreeMap::new(),
            coeffs: file.coeffs,
            params,
        });
    }
    let id = args.family.as_deref().ok_or_else(|| config("give --model FILE or --family ID"))?;
    let cat = Catalog::builtin();
    let fam = cat.family(id)?;
    let variant = match args.variant {
        Some(VariantArg::Printed) => Variant::Printed,
        Some(VariantArg::Corrected) => Variant::Corrected,
        None => verified_variant(fam),
    };
    let n = args.n.unwrap_or(1);
    let given = parse_free(&args.free)?;
    if let Some(name) = given.keys().find(|k| !fam.free.iter().any(|p| &p.name == *k)) {
        return Err(config(format!("family {id} has no free parameter `{name}`")));
    }
    let mut free: BTreeMap<String, Rational> = BTreeMap::new();
    if fam.free.iter().any(|p| !given.contains_key(&p.name)) {
        let drawn = fam
            .sample(n, 1, seed, variant)
            .into_iter()
            .next()
            .ok_or_else(|| config(format!("no admissible sample for {id} at N = {n}")))?;
        free = drawn.free;
    }
    free.extend(given);
    fam.instantiate(n, &free, variant)
}

fn rational_json(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

fn scalar_json<S: Scalar>(x: &S) -> Value {
    if S::EXACT {
        Value::String(x.to_string())
    } else {
        json!(x.to_f64())
    }
}

fn coeffs_json(h: &HamiltonianCoeffs) -> Value {
    Value::Object(h.to_strings().into_iter().map(|(k, v)| (k.to_string(), Value::String(v))).collect())
}

fn instance_json(inst: &Instance) -> Value {
    json!({
        "source": inst.family,
        "variant": inst.variant,
        "free": inst.free_strings(),
        "coeffs": coeffs_json(&inst.coeffs),
        "subspace": inst.params,
    })
}

fn emit(report: &Value, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(report).map_err(|e| config(e.to_string()))? + "\n";
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| config(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be positive");
            return EXIT_USAGE;
        }
        pool = pool.num_threads(j);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match pool.install(|| execute(&cli.command)) {
        Ok((report, passed)) => {
            if let Err(e) = emit(&report, cli.json.as_deref()) {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
            if passed {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                QesError::CutoffViolated(_) | QesError::NormDivergence { .. } | QesError::Eigen(_) => {
                    EXIT_FAIL
                }
                _ => EXIT_USAGE,
            }
        }
    }
}

/// Runs one command: `(report, passed)`.
pub fn execute(cmd: &Command) -> Result<(Value, bool)> {
    let seed = seed_from_env();
    match cmd {
        Command::VerifyAlgebra { dim, exact, tolerance } => verify_algebra(*dim, *exact, *tolerance),
        Command::VerifyStructure { family, kind, n, samples, dim, exact, tolerance } => {
            let kinds: Vec<SpinKind> = if kind.is_empty() {
                vec![SpinKind::Spin0, SpinKind::SpinHalf, SpinKind::Spin1]
            } else {
                kind.iter().map(|&k| k.into()).collect()
            };
            let params: Vec<SubspaceParams> = match family {
                Some(id) => {
                    let cat = Catalog::builtin();
                    let fam = cat.family(id)?;
                    fam.sample(*n, *samples, seed, verified_variant(fam))
                        .into_iter()
                        .map(|i| i.params)
                        .collect()
                }
                None => kinds.iter().flat_map(|&k| sample_subspaces(k, *n, *samples, seed)).collect(),
            };
            verify_structure_cmd(&params, *dim, *exact, *tolerance)
        }
        Command::VerifyCatalog { family, n, samples, exact, perturb } => {
            let perturb = perturb.as_deref().map(parse_rational).transpose()?;
            let depths = n.map(|n| vec![n]).unwrap_or_else(|| vec![0, 1, 2, 3]);
            let opts = VerifyOptions { depths, samples: *samples, seed, exact: *exact, perturb };
            verify_catalog(family.as_deref(), &opts)
        }
        Command::Cutoff { instance, exact } => {
            let inst = resolve(instance, seed)?;
            require_admissible(&inst.params)?;
            Ok(if *exact { cutoff_cmd::<Rational>(&inst) } else { cutoff_cmd::<f64>(&inst) })
        }
        Command::Spectrum { instance, fock_dims, tolerance } => {
            let inst = resolve(instance, seed)?;
            spectrum_cmd(&inst, fock_dims, *tolerance)
        }
        Command::BasisDump { instance, terms, fock_dim, exact } => {
            let inst = resolve(instance, seed)?;
            basis_dump(&inst.params, *terms, *fock_dim, *exact)
        }
    }
}

fn verify_algebra(dim: usize, exact: bool, tol: f64) -> Result<(Value, bool)> {
    fn run<S: Scalar>(dim: usize, tol: f64) -> Result<(Value, bool)> {
        let g = build_generators::<S>(dim)?;
        let r = commutator_residuals(&g);
        let passed = if S::EXACT {
            r.r1.is_zero() && r.r2.is_zero() && r.casimir.is_zero()
        } else {
            r.r1.to_f64() <= tol && r.r2.to_f64() <= tol && r.casimir.to_f64() <= tol
        };
        let report = json!({
            "M": dim,
            "mode": if S::EXACT { "exact" } else { "float" },
            "k0KpmResidual": scalar_json(&r.r1),
            "kpKmResidual": scalar_json(&r.r2),
            "casimirResidual": scalar_json(&r.casimir),
            "casimir": "-3/16",
            "passed": passed,
        });
        eprintln!(
            "algebra M={dim}: [K0,K±]∓K± {}, [K+,K-]+2K0 {}, C+3/16 {} -> {}",
            r.r1,
            r.r2,
            r.casimir,
            if passed { "pass" } else { "FAIL" }
        );
        Ok((report, passed))
    }
    if dim < MIN_TRUNCATION {
        return Err(QesError::TruncationTooSmall { got: dim, min: MIN_TRUNCATION });
    }
    if exact {
        run::<Rational>(dim, tol)
    } else {
        run::<f64>(dim, tol)
    }
}

fn verify_structure_cmd(
    params: &[SubspaceParams],
    dim: usize,
    exact: bool,
    tol: f64,
) -> Result<(Value, bool)> {
    let rows: Vec<Result<Value>> = params
        .par_iter()
        .map(|p| {
            if exact {
                let r = verify_structure_series(p, 4 * p.n + 40)?;
                Ok(json!({ "kind": p.kind, "subspace": p, "residual": rational_json(&r), "passed": Scalar::is_zero(&r) }))
            } else {
                let r = verify_structure(p, dim)?;
                Ok(json!({
                    "kind": p.kind,
                    "subspace": p,
                    "kPlus": r.k_plus,
                    "kMinus": r.k_minus,
                    "kZero": r.k_zero,
                    "passed": r.max() <= tol,
                }))
            }
        })
        .collect();
    let rows: Vec<Value> = rows.into_iter().collect::<Result<_>>()?;
    let passed = !rows.is_empty() && rows.iter().all(|r| r["passed"] == json!(true));
    let failed = rows.iter().filter(|r| r["passed"] != json!(true)).count();
    eprintln!("structure: {} parameter sets, {failed} failed", rows.len());
    Ok((json!({ "M": dim, "exact": exact, "tolerance": tol, "samples": rows, "passed": passed }), passed))
}

fn verify_catalog(filter: Option<&str>, opts: &VerifyOptions) -> Result<(Value, bool)> {
    let cat = Catalog::builtin();
    let families: Vec<_> = match filter {
        Some(id) => vec![cat.family(id)?.clone()],
        None => cat.families.clone(),
    };
    let reports: Vec<_> = families.par_iter().map(|f| verify_family(f, opts)).collect();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    eprintln!("{:<8} {:<8} notes", "family", "status");
    for r in &reports {
        let status = match r.status {
            FamilyStatus::Pass => "PASS",
            FamilyStatus::Erratum => "ERRATUM",
            FamilyStatus::Fail => "FAIL",
        };
        *counts.entry(status).or_default() += 1;
        let printed = &r.variants[0];
        let violated: std::collections::BTreeSet<&str> =
            printed.instances.iter().flat_map(|i| i.violated.iter().map(String::as_str)).collect();
        let note = if violated.is_empty() {
            String::new()
        } else {
            format!("printed row violates {}", violated.into_iter().collect::<Vec<_>>().join(", "))
        };
        eprintln!("{:<8} {:<8} {}", r.id, status, note);
    }
    let passed = !reports.iter().any(|r| r.status == FamilyStatus::Fail);
    let report = json!({
        "seed": opts.seed,
        "exact": opts.exact,
        "depths": opts.depths,
        "samples": opts.samples,
        "perturb": opts.perturb.as_ref().map(format_rational),
        "summary": counts,
        "families": reports,
        "passed": passed,
    });
    Ok((report, passed))
}

fn block_json<S: Scalar>(b: &crate::block::Block<S>) -> Value {
    Value::Array(b.rows().iter().map(|r| Value::Array(r.iter().map(scalar_json).collect())).collect())
}

fn cutoff_cmd<S: Scalar>(inst: &Instance) -> (Value, bool) {
    let rep: CutoffReport<S> = cutoff_residuals(&inst.coeffs, &inst.params);
    let conditions: serde_json::Map<String, Value> =
        CONDITION_NAMES.iter().zip(rep.blocks()).map(|(n, b)| (n.to_string(), block_json(b))).collect();
    let violated = rep.violated();
    let passed = violated.is_empty();
    eprintln!(
        "cut-off N={}: {}",
        inst.params.n,
        if passed { "all conditions hold".to_string() } else { format!("violated {}", violated.join(", ")) }
    );
    let report = json!({
        "instance": instance_json(inst),
        "exact": S::EXACT,
        "threshold": rep.threshold,
        "conditions": conditions,
        "violated": violated,
        "hermitian": hermitian_check(&inst.coeffs),
        "passed": passed,
    });
    (report, passed)
}

fn spectrum_cmd(inst: &Instance, dims: &[usize], tol: f64) -> Result<(Value, bool)> {
    if dims.is_empty() || dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(config("--fock-dims must be a nonempty ascending list"));
    }
    require_admissible(&inst.params)?;
    let spec = qes_spectrum(&inst.coeffs, &inst.params)?;
    let matches = fock_crosscheck(&inst.coeffs, &inst.params, &spec, dims)?;
    let largest = *dims.last().expect("nonempty");
    let closure = closure_residual(&inst.coeffs, &inst.params, largest)?;
    let hermitian = hermitian_check(&inst.coeffs).hermitian;
    let last = matches.last().expect("nonempty");
    let worst = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let passed = if hermitian {
        last.gaps.as_deref().map(worst).unwrap_or(f64::INFINITY) <= tol
    } else {
        worst(&last.eigen_residuals) <= tol
    };
    eprintln!(
        "spectrum: {} eigenvalues (rank {} of {}), closure {:.2e}, {} check at M={largest}: {}",
        spec.eigenvalues.len(),
        spec.rank(),
        spec.exact_block.len(),
        closure,
        if hermitian { "gap" } else { "eigen-residual" },
        if passed { "pass" } else { "FAIL" }
    );
    let report = json!({
        "instance": instance_json(inst),
        "hermitian": hermitian,
        "blockMatrix": spec.exact_block.iter().map(|r| r.iter().map(format_rational).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "rank": spec.rank(),
        "dependent": spec.relations.dependent.iter().map(|(j, _)| j).collect::<Vec<_>>(),
        "blockEigenvalues": spec.eigenvalues.iter().map(|z| json!({"re": z.re, "im": z.im})).collect::<Vec<_>>(),
        "fockMatches": matches,
        "gapsDecreasing": hermitian.then(|| gaps_decreasing(&matches)),
        "closureResidual": closure,
        "tolerance": tol,
        "passed": passed,
    });
    Ok((report, passed))
}

fn basis_dump(p: &SubspaceParams, terms: usize, fock_dim: usize, exact: bool) -> Result<(Value, bool)> {
    let seed = require_admissible(p)?;
    let len = terms.max(2) + 2;
    let (u, v) = solve_uv::<Rational>(p, len)?;
    let series = |s: &crate::series::BargmannSeries<Rational>| -> Value {
        let coeffs: Vec<Value> = (s.low()..s.low() + terms as i64)
            .map(|k| {
                let c = s.coeff(k);
                if exact {
                    rational_json(&c)
                } else {
                    json!(c.to_f64())
                }
            })
            .collect();
        json!({ "low": s.low(), "coeffs": coeffs })
    };
    let fock = fock_basis(p, fock_dim)?;
    let mut vectors = Vec::new();
    let mut diverging = false;
    for (level, comps) in fock.iter().enumerate() {
        for (component, fv) in comps.iter().enumerate() {
            diverging |= fv.diverging();
            vectors.push(json!({
                "level": level,
                "component": component,
                "normSq": fv.norm_sq,
                "tailEstimate": fv.tail_estimate,
                "diverging": fv.diverging(),
                "amplitudes": &fv.amps[..terms.min(fv.amps.len())],
            }));
        }
    }
    if diverging {
        eprintln!("warning: some Fock norms do not converge at M={fock_dim}");
    }
    eprintln!("basis: seed {seed:?}, {} functions", vectors.len());
    let report = json!({
        "subspace": p,
        "seed": seed,
        "u": series(&u),
        "v": series(&v),
        "M": fock_dim,
        "fock": vectors,
        "passed": !diverging,
    });
    Ok((report, !diverging))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_free_assignments() {
        let f = parse_free(&["rho=1/4".into(), "a_0m = 0.1".into()]).unwrap();
        assert_eq!(f["rho"], crate::scalar::q(1, 4));
        assert_eq!(f["a_0m"], crate::scalar::q(1, 10));
        assert!(parse_free(&["rho".into()]).is_err());
    }

    #[test]
    fn small_truncation_is_usage_error() {
        assert_eq!(run(["qes", "verify-algebra", "--dim", "7"]), EXIT_USAGE);
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        assert_eq!(run(["qes", "frobnicate"]), EXIT_USAGE);
    }
}
