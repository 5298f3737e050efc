//! Printed QES solution families stored as data, their instantiation into
//! concrete `(HamiltonianCoeffs, SubspaceParams)` pairs, and exact
//! verification of the cut-off conditions.

pub mod expr;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{admissible, Seed, SpinKind, SubspaceParams};
use crate::block::Block;
use crate::cutoff::{cutoff_residuals, CONDITION_NAMES};
use crate::error::{QesError, Result};
use crate::model::{hermitian_check, HamiltonianCoeffs, COEFF_NAMES};
use crate::scalar::{format_rational, q, Rational, Scalar};

use expr::{parse, Env, Expr};

const CATALOG_JSON: &str = include_str!("../../data/catalog.json");

/// Supported catalog file version.
pub const CATALOG_VERSION: u32 = 1;

/// Default base seed for sampling free parameters (overridden by `QES_SEED`).
pub const DEFAULT_SEED: u64 = 20_240_601;

const SUBSPACE_NAMES: [&str; 6] = ["alpha", "beta", "gamma", "delta", "rho", "tau"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    /// Any value from the small-rational pool.
    #[serde(rename = "real")]
    Real,
    /// Pool values (the pool excludes zero).
    #[serde(rename = "nonzero")]
    Nonzero,
    /// Pool values plus the integers -1..=2.
    #[serde(rename = "any")]
    Any,
    #[serde(rename = "int>=0")]
    NonNegativeInt,
    #[serde(rename = "int>=-1")]
    IntFromMinusOne,
}

impl Domain {
    /// Values drawn when sampling "arbitrary value" entries. Exact zeros
    /// need rational inputs, so the pool is a handful of small fractions.
    pub fn pool(self) -> Vec<Rational> {
        let fractions = [q(1, 10), q(-1, 10), q(1, 4), q(-1, 4), q(1, 3), q(-1, 3)];
        match self {
            Domain::Real | Domain::Nonzero => fractions.to_vec(),
            Domain::Any => {
                let mut v = fractions.to_vec();
                v.extend((-1..=2).map(|k| q(k, 1)));
                v
            }
            Domain::NonNegativeInt => (0..=3).map(|k| q(k, 1)).collect(),
            Domain::IntFromMinusOne => (-1..=2).map(|k| q(k, 1)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeParam {
    pub name: String,
    pub domain: Domain,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Erratum {
    pub field: String,
    pub printed: String,
    pub corrected: String,
}

/// One table row (or closed-form fixture).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionFamily {
    pub id: String,
    pub kind: SpinKind,
    pub table: String,
    pub hermitian: bool,
    pub free: Vec<FreeParam>,
    /// Pinned or derived subspace parameters; missing ones are free.
    pub subspace: BTreeMap<String, String>,
    pub coeffs: BTreeMap<String, String>,
    #[serde(default)]
    pub seed: Option<Seed>,
    #[serde(default)]
    pub note: Option<String>,
    #[serde(default)]
    pub errata: Vec<Erratum>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Exactly as printed.
    Printed,
    /// With the row's errata applied.
    Corrected,
}

/// A concrete Hamiltonian with its invariant subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub family: String,
    pub variant: Variant,
    pub free: BTreeMap<String, Rational>,
    pub coeffs: HamiltonianCoeffs,
    pub params: SubspaceParams,
}

impl Instance {
    pub fn free_strings(&self) -> BTreeMap<String, String> {
        self.free.iter().map(|(k, v)| (k.clone(), format_rational(v))).collect()
    }

    /// `max(|rho|, |tau|)` (only `rho` for spin-0).
    pub fn max_weight(&self) -> Rational {
        let r = self.params.rho.abs();
        let t = self.params.tau.abs();
        if self.params.kind == SpinKind::Spin0 || r >= t {
            r
        } else {
            t
        }
    }
}

impl SolutionFamily {
    fn coeff_expr(&self, name: &str, variant: Variant) -> Option<&str> {
        if variant == Variant::Corrected {
            if let Some(e) = self.errata.iter().find(|e| e.field == name) {
                return Some(&e.corrected);
            }
        }
        self.coeffs.get(name).map(String::as_str)
    }

    pub fn has_errata(&self) -> bool {
        !self.errata.is_empty()
    }

    pub fn variants(&self) -> Vec<Variant> {
        if self.has_errata() {
            vec![Variant::Printed, Variant::Corrected]
        } else {
            vec![Variant::Printed]
        }
    }

    /// Builds the instance at depth `n` from values of the free parameters.
    pub fn instantiate(
        &self,
        n: usize,
        free: &BTreeMap<String, Rational>,
        variant: Variant,
    ) -> Result<Instance> {
        let mut env: Env = Env::new();
        for p in &self.free {
            let v = free.get(&p.name).ok_or_else(|| {
                QesError::Catalog(format!("{}: missing free parameter `{}`", self.id, p.name))
            })?;
            env.insert(p.name.clone(), v.clone());
        }
        env.insert("N".into(), q(n as i64, 1));

        // Subspace parameters may refer to each other; resolve in
        // dependency order.
        let mut pending: Vec<(&str, Expr)> = Vec::new();
        for name in SUBSPACE_NAMES {
            match self.subspace.get(name) {
                Some(src) => pending.push((name, parse(src)?)),
                None if env.contains_key(name) => {}
                None if self.kind == SpinKind::Spin0 => {
                    env.insert(name.into(), q(0, 1));
                }
                None => {
                    return Err(QesError::Catalog(format!(
                        "{}: subspace parameter `{name}` is neither pinned nor free",
                        self.id
                    )))
                }
            }
        }
        while !pending.is_empty() {
            let before = pending.len();
            let mut rest = Vec::new();
            for (name, e) in pending {
                let mut vars = Vec::new();
                e.vars(&mut vars);
                if vars.iter().all(|v| env.contains_key(v)) {
                    let value = e.eval(&env)?;
                    env.insert(name.into(), value);
                } else {
                    rest.push((name, e));
                }
            }
            if rest.len() == before {
                return Err(QesError::Catalog(format!("{}: circular subspace parameters", self.id)));
            }
            pending = rest;
        }

        let mut values: BTreeMap<&str, Rational> = BTreeMap::new();
        for name in COEFF_NAMES {
            if let Some(src) = self.coeff_expr(name, variant) {
                values.insert(name, parse(src)?.eval(&env)?);
            } else if let Some(v) = free.get(name) {
                values.insert(name, v.clone());
            }
        }
        let pick = |name: &str, partner: &str| -> Rational {
            values
                .get(name)
                .cloned()
                .or_else(|| if self.hermitian { values.get(partner).cloned() } else { None })
                .unwrap_or_else(|| q(0, 1))
        };
        let coeffs = HamiltonianCoeffs {
            a_pp: pick("a_pp", "a_mm"),
            a_mm: pick("a_mm", "a_pp"),
            a_00: pick("a_00", ""),
            a_0m: pick("a_0m", "a_p0"),
            a_p0: pick("a_p0", "a_0m"),
            a_0: pick("a_0", ""),
            a_m: pick("a_m", "a_p"),
            a_p: pick("a_p", "a_m"),
        };
        let get = |k: &str| env.get(k).cloned().unwrap_or_else(|| q(0, 1));
        let params = SubspaceParams {
            alpha: get("alpha"),
            beta: get("beta"),
            gamma: get("gamma"),
            delta: get("delta"),
            rho: get("rho"),
            tau: get("tau"),
            n,
            kind: self.kind,
            seed: self.seed.unwrap_or_default(),
        };
        Ok(Instance { family: self.id.clone(), variant, free: free.clone(), coeffs, params })
    }

    /// Draws up to `count` admissible instances at depth `n`. Draws are
    /// deterministic in `(seed, family, n)`.
    pub fn sample(&self, n: usize, count: usize, seed: u64, variant: Variant) -> Vec<Instance> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream_id(&self.id, n));
        let mut out: Vec<Instance> = Vec::new();
        let pools: Vec<Vec<Rational>> = self.free.iter().map(|p| p.domain.pool()).collect();
        let combos: usize = pools.iter().map(Vec::len).product::<usize>().max(1);
        let attempts = (50 * count).max(200).min(combos * 4);
        for _ in 0..attempts {
            if out.len() == count {
                break;
            }
            let free: BTreeMap<String, Rational> = self
                .free
                .iter()
                .zip(&pools)
                .map(|(p, pool)| (p.name.clone(), pool.choose(&mut rng).expect("nonempty pool").clone()))
                .collect();
            if out.iter().any(|i| i.free == free) {
                continue;
            }
            if let Ok(inst) = self.instantiate(n, &free, variant) {
                if admissible(&inst.params).ok {
                    out.push(inst);
                }
            }
        }
        out
    }
}

fn stream_id(id: &str, n: usize) -> u64 {
    // FNV-1a over the id, mixed with the depth.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Random admissible subspace parameters of one spin kind, for checks that
/// do not need a Hamiltonian. Gaussian weights stay within `|rho|, |tau| <= 1/4`
/// so Fock norms converge quickly.
pub fn sample_subspaces(kind: SpinKind, n: usize, count: usize, seed: u64) -> Vec<SubspaceParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream_id(kind.name(), n));
    let couplings = [q(0, 1), q(1, 1), q(-1, 1), q(1, 3), q(-1, 3), q(1, 4), q(-1, 4), q(1, 10), q(-1, 10)];
    let weights = [q(0, 1), q(1, 10), q(-1, 10), q(1, 4), q(-1, 4)];
    let exponents = [q(0, 1), q(1, 1), q(2, 1), q(3, 1), q(-1, 1), q(1, 3), q(-1, 3)];
    let mut out: Vec<SubspaceParams> = Vec::new();
    for _ in 0..(200 * count.max(1)) {
        if out.len() == count {
            break;
        }
        let mut pick = |pool: &[Rational]| pool.choose(&mut rng).expect("nonempty pool").clone();
        let p = match kind {
            SpinKind::Spin0 => SubspaceParams::spin0(pick(&exponents[..4]), pick(&weights), n),
            _ => SubspaceParams::spin_half(
                pick(&couplings),
                pick(&exponents),
                pick(&couplings),
                pick(&exponents),
                pick(&weights),
                pick(&weights),
                n,
            )
            .with_kind(kind),
        };
        if !out.contains(&p) && admissible(&p).ok {
            out.push(p);
        }
    }
    out
}

/// Base seed from `QES_SEED`, falling back to [`DEFAULT_SEED`].
pub fn seed_from_env() -> u64 {
    std::env::var("QES_SEED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_SEED)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub version: u32,
    pub description: String,
    pub families: Vec<SolutionFamily>,
    pub fixtures: Vec<SolutionFamily>,
}

impl Catalog {
    /// The catalog shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_json(CATALOG_JSON).expect("bundled catalog is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cat: Catalog =
            serde_json::from_str(text).map_err(|e| QesError::Catalog(format!("parse: {e}")))?;
        if cat.version != CATALOG_VERSION {
            return Err(QesError::Catalog(format!(
                "unsupported catalog version {} (expected {CATALOG_VERSION})",
                cat.version
            )));
        }
        for fam in cat.families.iter().chain(&cat.fixtures) {
            for src in fam
                .subspace
                .values()
                .chain(fam.coeffs.values())
                .chain(fam.errata.iter().flat_map(|e| [&e.printed, &e.corrected]))
            {
                parse(src)
                    .and_then(|e| e.check_calls())
                    .map_err(|e| QesError::Catalog(format!("{}: {e}", fam.id)))?;
            }
        }
        Ok(cat)
    }

    pub fn family(&self, id: &str) -> Result<&SolutionFamily> {
        self.families
            .iter()
            .chain(&self.fixtures)
            .find(|f| f.id == id)
            .ok_or_else(|| QesError::UnknownFamily(id.to_string()))
    }

    pub fn fixture(&self, id: &str) -> Result<&SolutionFamily> {
        self.fixtures.iter().find(|f| f.id == id).ok_or_else(|| QesError::UnknownFamily(id.to_string()))
    }
}

/// Outcome of checking one instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceResult {
    #[serde(rename = "N")]
    pub n: usize,
    pub free: BTreeMap<String, String>,
    pub passed: bool,
    pub hermitian: bool,
    pub violated: Vec<String>,
    /// Residual blocks of the violated conditions, as `"p/q"` strings in
    /// exact mode.
    pub residuals: BTreeMap<String, Vec<Vec<String>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariantReport {
    pub variant: Variant,
    pub passed: bool,
    pub instances: Vec<InstanceResult>,
    /// Depths for which fewer admissible samples than requested were found.
    pub undersampled: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FamilyStatus {
    /// The row as printed passes.
    #[serde(rename = "PASS")]
    Pass,
    /// The printed row fails; the recorded correction passes.
    #[serde(rename = "ERRATUM")]
    Erratum,
    #[serde(rename = "FAIL")]
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyReport {
    pub id: String,
    pub status: FamilyStatus,
    pub variants: Vec<VariantReport>,
}

/// Options for [`verify_family`].
#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub depths: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    pub exact: bool,
    /// Relative shift of `a_m`, `a_p` applied before checking (negative
    /// control).
    pub perturb: Option<Rational>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { depths: vec![0, 1, 2, 3], samples: 3, seed: DEFAULT_SEED, exact: true, perturb: None }
    }
}

fn residual_strings<S: Scalar>(b: &Block<S>) -> Vec<Vec<String>> {
    b.rows().iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
}

pub fn check_instance(inst: &Instance, exact: bool) -> InstanceResult {
    fn run<S: Scalar>(inst: &Instance) -> (Vec<String>, BTreeMap<String, Vec<Vec<String>>>) {
        let rep = cutoff_residuals::<S>(&inst.coeffs, &inst.params);
        let violated: Vec<String> = rep.violated().into_iter().map(String::from).collect();
        let residuals = CONDITION_NAMES
            .iter()
            .zip(rep.blocks())
            .filter(|(name, _)| violated.iter().any(|v| v == *name))
            .map(|(name, b)| (name.to_string(), residual_strings(b)))
            .collect();
        (violated, residuals)
    }
    let (violated, residuals) = if exact { run::<Rational>(inst) } else { run::<f64>(inst) };
    InstanceResult {
        n: inst.params.n,
        free: inst.free_strings(),
        passed: violated.is_empty(),
        hermitian: hermitian_check(&inst.coeffs).hermitian,
        violated,
        residuals,
    }
}

pub fn verify_variant(fam: &SolutionFamily, variant: Variant, opts: &VerifyOptions) -> VariantReport {
    let mut instances = Vec::new();
    let mut undersampled = Vec::new();
    for &n in &opts.depths {
        let drawn = fam.sample(n, opts.samples, opts.seed, variant);
        if drawn.len() < opts.samples {
            undersampled.push(n);
        }
        for mut inst in drawn {
            if let Some(p) = &opts.perturb {
                inst.coeffs = inst.coeffs.perturb(p);
            }
            instances.push(check_instance(&inst, opts.exact));
        }
    }
    let passed = !instances.is_empty() && instances.iter().all(|i| i.passed);
    VariantReport { variant, passed, instances, undersampled }
}

/// Samples the family over the requested depths and checks every cut-off
/// condition. Rows with recorded errata are checked both as printed and
/// corrected.
pub fn verify_family(fam: &SolutionFamily, opts: &VerifyOptions) -> FamilyReport {
    let variants: Vec<VariantReport> =
        fam.variants().into_iter().map(|v| verify_variant(fam, v, opts)).collect();
    let printed = variants[0].passed;
    let corrected = variants.get(1).map(|v| v.passed).unwrap_or(false);
    let status = if printed {
        FamilyStatus::Pass
    } else if corrected {
        FamilyStatus::Erratum
    } else {
        FamilyStatus::Fail
    };
    FamilyReport { id: fam.id.clone(), status, variants }
}

/// Instances that verify: the printed row, or its correction when the
/// printed row carries an erratum.
pub fn verified_variant(fam: &SolutionFamily) -> Variant {
    if fam.has_errata() {
        Variant::Corrected
    } else {
        Variant::Printed
    }
}

/// Named closed-form instances (trigonometric, hyperbolic, Bessel and
/// oscillator subspaces), each at `omega = 1` and unit couplings where free.
pub fn fixtures(n: usize) -> Result<Vec<Instance>> {
    let cat = Catalog::builtin();
    cat.fixtures
        .iter()
        .map(|fam| {
            let free = fam
                .free
                .iter()
                .map(|p| {
                    let v = match p.name.as_str() {
                        "omega" => q(1, 1),
                        "a_00" => q(1, 1),
                        "a_0m" => q(1, 2),
                        "a_m" => q(1, 3),
                        _ => q(1, 1),
                    };
                    (p.name.clone(), v)
                })
                .collect();
            fam.instantiate(n, &free, Variant::Printed)
        })
        .collect()
}
