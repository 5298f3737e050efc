//! Invariant-subspace basis functions.
//!
//! The pair `(u, v)` solves
//!
//! ```text
//! u' = alpha v + (beta / z) u + 2 rho z u
//! v' = gamma u + (delta / z) v + 2 tau z v
//! ```
//!
//! and the subspace is spanned by `u_n = z^(2n) u`, `v_n = z^(2n+1) v` for
//! `n = 0..=N` (spin-half), by `z^(2n) u` alone (spin-0), or by
//! `z^(2n) u^2, z^(2n+1) u v, z^(2n) v^2` (spin-1).
//!
//! Everything is built from one Frobenius recurrence on `u` and `w = z v`.
//! Writing `u = sum u_k z^k`, `w = sum w_k z^k`:
//!
//! ```text
//! (k - 1 - delta) w_k = gamma u_(k-2) + 2 tau w_(k-2)
//! (k - beta)      u_k = alpha w_k     + 2 rho u_(k-2)
//! ```
//!
//! A vanishing divisor is either the seed of the chosen branch, a free
//! coefficient set to zero (pure branch) when the right-hand side vanishes,
//! or a logarithmic resonance.

use serde::{Deserialize, Serialize};

use crate::error::{QesError, Result};
use crate::fock::FockVector;
use crate::scalar::{as_i64, is_integer, ln_factorials, q, Rational, Scalar};
use crate::series::BargmannSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpinKind {
    #[serde(rename = "spin-0")]
    Spin0,
    #[serde(rename = "spin-half")]
    SpinHalf,
    #[serde(rename = "spin-1")]
    Spin1,
}

impl SpinKind {
    /// Number of basis functions per level.
    pub fn block_dim(self) -> usize {
        match self {
            SpinKind::Spin0 => 1,
            SpinKind::SpinHalf => 2,
            SpinKind::Spin1 => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpinKind::Spin0 => "spin-0",
            SpinKind::SpinHalf => "spin-half",
            SpinKind::Spin1 => "spin-1",
        }
    }
}

/// Which Frobenius branch seeds the recurrence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Seed {
    /// Pick the analytic branch from the parameters.
    #[default]
    Auto,
    /// `u_beta = 1`.
    U,
    /// `v_delta = 1`.
    V,
    /// Both channels seeded independently (only when `alpha = gamma = 0`).
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceParams {
    #[serde(with = "crate::scalar::rational_serde")]
    pub alpha: Rational,
    #[serde(with = "crate::scalar::rational_serde")]
    pub beta: Rational,
    #[serde(with = "crate::scalar::rational_serde")]
    pub gamma: Rational,
    #[serde(with = "crate::scalar::rational_serde")]
    pub delta: Rational,
    #[serde(with = "crate::scalar::rational_serde")]
    pub rho: Rational,
    #[serde(with = "crate::scalar::rational_serde")]
    pub tau: Rational,
    pub n: usize,
    pub kind: SpinKind,
    #[serde(default)]
    pub seed: Seed,
}

impl SubspaceParams {
    pub fn spin0(beta: Rational, rho: Rational, n: usize) -> Self {
        Self {
            alpha: q(0, 1),
            beta,
            gamma: q(0, 1),
            delta: q(0, 1),
            rho,
            tau: q(0, 1),
            n,
            kind: SpinKind::Spin0,
            seed: Seed::Auto,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn spin_half(
        alpha: Rational,
        beta: Rational,
        gamma: Rational,
        delta: Rational,
        rho: Rational,
        tau: Rational,
        n: usize,
    ) -> Self {
        Self { alpha, beta, gamma, delta, rho, tau, n, kind: SpinKind::SpinHalf, seed: Seed::Auto }
    }

    pub fn with_kind(mut self, kind: SpinKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_seed(mut self, seed: Seed) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    /// Dimension of the subspace spanned by the basis functions.
    pub fn dim(&self) -> usize {
        self.kind.block_dim() * (self.n + 1)
    }
}

/// Verdict of [`admissible`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Admissibility {
    pub ok: bool,
    /// Branch that will actually be used (`U`, `V` or `Both`).
    pub seed: Option<Seed>,
    pub reasons: Vec<String>,
}

fn is_nat(r: &Rational) -> bool {
    is_integer(r) && *r >= q(0, 1)
}

fn is_int_ge_minus_one(r: &Rational) -> bool {
    is_integer(r) && *r >= q(-1, 1)
}

/// Branches consistent with the couplings and the indicial exponents, in
/// order of preference.
fn candidate_seeds(p: &SubspaceParams, reasons: &mut Vec<String>) -> Vec<Seed> {
    let zero = q(0, 1);
    let (a0, g0) = (p.alpha == zero, p.gamma == zero);
    let nat_beta = is_nat(&p.beta);
    let int_delta = is_int_ge_minus_one(&p.delta);
    let want = |seed: Seed| p.seed == Seed::Auto || p.seed == seed;

    if p.kind == SpinKind::Spin0 {
        if !(a0 && g0) {
            reasons.push("spin-0 subspace requires alpha = gamma = 0".into());
        }
        if !nat_beta {
            reasons.push("analyticity: beta must be a non-negative integer".into());
        }
        if !matches!(p.seed, Seed::Auto | Seed::U) {
            reasons.push("spin-0 subspace is seeded by u alone".into());
        }
        return vec![Seed::U];
    }

    let mut out = Vec::new();
    if a0 && g0 {
        if !nat_beta {
            reasons.push("analyticity: beta must be a non-negative integer".into());
        }
        if !int_delta {
            reasons.push("analyticity: delta must be an integer >= -1".into());
        }
        if want(Seed::Both) {
            out.push(Seed::Both);
        } else {
            reasons.push("alpha = gamma = 0 requires independent seeds for u and v".into());
        }
        return out;
    }
    if a0 {
        // v is slaved to u; seeding v would leave u identically zero.
        if !nat_beta {
            reasons.push("analyticity: beta must be a non-negative integer".into());
        }
        if want(Seed::U) {
            out.push(Seed::U);
        } else {
            reasons.push("alpha = 0 requires the u-seeded branch".into());
        }
        return out;
    }
    if g0 {
        if !int_delta {
            reasons.push("analyticity: delta must be an integer >= -1".into());
        }
        if want(Seed::V) {
            out.push(Seed::V);
        } else {
            reasons.push("gamma = 0 requires the v-seeded branch".into());
        }
        return out;
    }
    if nat_beta && want(Seed::U) {
        out.push(Seed::U);
    }
    if int_delta && want(Seed::V) {
        out.push(Seed::V);
    }
    if out.is_empty() {
        if p.seed == Seed::Auto {
            reasons.push("analyticity: need beta a non-negative integer or delta an integer >= -1".into());
        } else {
            reasons.push(format!("analyticity: seed {:?} has no analytic branch", p.seed));
        }
    }
    out
}

/// Length of the exact probe used to detect resonances: every vanishing
/// divisor lies below it.
fn probe_len(p: &SubspaceParams) -> usize {
    let mut len = 4i64;
    if let Some(b) = as_i64(&p.beta) {
        len = len.max(b + 4);
    }
    if let Some(d) = as_i64(&p.delta) {
        len = len.max(d + 5);
    }
    len as usize
}

pub fn admissible(p: &SubspaceParams) -> Admissibility {
    let mut reasons = Vec::new();
    let half = q(1, 2);
    if p.rho.abs() >= half {
        reasons.push("normalizability: |rho| must be < 1/2".into());
    }
    if p.kind != SpinKind::Spin0 && p.tau.abs() >= half {
        reasons.push("normalizability: |tau| must be < 1/2".into());
    }
    let candidates = candidate_seeds(p, &mut reasons);
    if !reasons.is_empty() {
        return Admissibility { ok: false, seed: None, reasons };
    }
    let len = probe_len(p);
    let mut last_err = None;
    for seed in candidates {
        match frobenius::<Rational>(p, seed, len, &Weights::Monomial) {
            Ok((u, w)) => {
                if p.kind == SpinKind::Spin1 && !w[0].is_zero() {
                    last_err = Some("spin-1 subspace requires an analytic v (delta >= 0)".to_string());
                    continue;
                }
                if u.iter().all(Scalar::is_zero) {
                    last_err = Some("degenerate branch: u vanishes identically".to_string());
                    continue;
                }
                return Admissibility { ok: true, seed: Some(seed), reasons };
            }
            Err(e) => last_err = Some(e.to_string()),
        }
    }
    reasons.push(last_err.unwrap_or_else(|| "no admissible branch".into()));
    Admissibility { ok: false, seed: None, reasons }
}

/// Fails with [`QesError::Inadmissible`] unless the parameters pass
/// [`admissible`]; returns the realised seed.
pub fn require_admissible(p: &SubspaceParams) -> Result<Seed> {
    let verdict = admissible(p);
    match verdict.seed {
        Some(seed) if verdict.ok => Ok(seed),
        _ => Err(QesError::Inadmissible(verdict.reasons)),
    }
}

/// Scaling of the recurrence. `Monomial` produces Taylor coefficients;
/// `FockScaled` produces `sqrt(k!)` times them, which stays in `f64` range
/// for long series.
pub(crate) enum Weights {
    Monomial,
    FockScaled,
}

impl Weights {
    fn step2<S: Scalar>(&self, k: usize) -> S {
        match self {
            Weights::Monomial => S::one(),
            Weights::FockScaled => S::from_f64_lossy(((k * (k - 1)) as f64).sqrt()),
        }
    }

    fn seed<S: Scalar>(&self, k: usize) -> S {
        match self {
            Weights::Monomial => S::one(),
            Weights::FockScaled => {
                let lnf = ln_factorials(k + 1);
                S::from_f64_lossy((0.5 * lnf[k]).exp())
            }
        }
    }
}

/// Runs the coupled recurrence for `k < len`, returning `(u_k, w_k)`.
pub(crate) fn frobenius<S: Scalar>(
    p: &SubspaceParams,
    seed: Seed,
    len: usize,
    weights: &Weights,
) -> Result<(Vec<S>, Vec<S>)> {
    let zero = q(0, 1);
    let seed_u = matches!(seed, Seed::U | Seed::Both).then(|| as_i64(&p.beta)).flatten();
    let seed_w = matches!(seed, Seed::V | Seed::Both).then(|| as_i64(&p.delta).map(|d| d + 1)).flatten();
    let alpha = S::from_rational(&p.alpha);
    let gamma = S::from_rational(&p.gamma);
    let two_rho = S::from_rational(&(p.rho.clone() * q(2, 1)));
    let two_tau = S::from_rational(&(p.tau.clone() * q(2, 1)));
    let spin0 = p.kind == SpinKind::Spin0;

    let mut u: Vec<S> = Vec::with_capacity(len);
    let mut w: Vec<S> = Vec::with_capacity(len);
    for k in 0..len {
        let kr = Rational::from_integer((k as i64).into());
        let s2 = if k >= 2 { weights.step2::<S>(k) } else { S::zero() };

        let wk = if spin0 {
            S::zero()
        } else {
            let mut rhs = S::zero();
            if k >= 2 {
                rhs = gamma.clone() * s2.clone() * u[k - 2].clone()
                    + two_tau.clone() * s2.clone() * w[k - 2].clone();
            }
            let div = kr.clone() - q(1, 1) - p.delta.clone();
            if div == zero {
                if seed_w == Some(k as i64) {
                    weights.seed(k)
                } else if rhs.is_zero() || !S::EXACT {
                    S::zero()
                } else {
                    return Err(QesError::Resonance { channel: 'v', power: k as i64 - 1 });
                }
            } else {
                rhs / S::from_rational(&div)
            }
        };
        w.push(wk);

        let mut rhs = alpha.clone() * w[k].clone();
        if k >= 2 {
            rhs = rhs + two_rho.clone() * s2 * u[k - 2].clone();
        }
        let div = kr - p.beta.clone();
        let uk = if div == zero {
            if seed_u == Some(k as i64) {
                weights.seed(k)
            } else if rhs.is_zero() || !S::EXACT {
                S::zero()
            } else {
                return Err(QesError::Resonance { channel: 'u', power: k as i64 });
            }
        } else {
            rhs / S::from_rational(&div)
        };
        u.push(uk);
    }
    Ok((u, w))
}

/// Default series length for `N` levels: long enough that the Fock norms
/// have converged for `|rho|, |tau| <= 0.45`.
pub fn default_series_len(n: usize) -> usize {
    200.max(4 * n + 60)
}

/// Taylor coefficients of `u` (powers `0..K`) and `v` (powers `-1..K-1`;
/// the `z^-1` coefficient is nonzero only on the `delta = -1` branch).
pub fn solve_uv<S: Scalar>(p: &SubspaceParams, len: usize) -> Result<(BargmannSeries<S>, BargmannSeries<S>)> {
    let seed = require_admissible(p)?;
    let (u, w) = frobenius::<S>(p, seed, len, &Weights::Monomial)?;
    Ok((BargmannSeries::from_coeffs(u), BargmannSeries::new(-1, w)))
}

/// Basis functions grouped by level: `levels[n][c]` is component `c` of
/// level `n`.
pub fn level_vectors<S: Scalar>(
    p: &SubspaceParams,
    u: &BargmannSeries<S>,
    v: &BargmannSeries<S>,
) -> Vec<Vec<BargmannSeries<S>>> {
    (0..=p.n as i64)
        .map(|n| match p.kind {
            SpinKind::Spin0 => vec![u.shift(2 * n)],
            SpinKind::SpinHalf => vec![u.shift(2 * n), v.shift(2 * n + 1)],
            SpinKind::Spin1 => vec![u.mul(u).shift(2 * n), u.mul(v).shift(2 * n + 1), v.mul(v).shift(2 * n)],
        })
        .collect()
}

/// `[u_0..u_N, v_0..v_N]` (component-major order), or `[u_0..u_N]` for
/// spin-0. All leading powers are non-negative for admissible parameters.
pub fn basis_vectors<S: Scalar>(
    p: &SubspaceParams,
    u: &BargmannSeries<S>,
    v: &BargmannSeries<S>,
) -> Vec<BargmannSeries<S>> {
    let levels = level_vectors(p, u, v);
    let dim = p.kind.block_dim();
    (0..dim).flat_map(|c| levels.iter().map(move |l| l[c].clone())).collect()
}

/// `sqrt(k!)`-scaled coefficients of the building blocks of every level:
/// component `c` of level `n` is `z^(2n + offset_c)` times `comps[c]`.
#[derive(Clone, Debug)]
pub struct FockComponents {
    comps: Vec<(Vec<f64>, i64)>,
}

impl FockComponents {
    pub fn new(p: &SubspaceParams, len: usize) -> Result<Self> {
        let seed = require_admissible(p)?;
        let (u, w) = frobenius::<f64>(p, seed, len, &Weights::FockScaled)?;
        let comps = match p.kind {
            SpinKind::Spin0 => vec![(u, 0)],
            SpinKind::SpinHalf => vec![(u, 0), (w, 0)],
            SpinKind::Spin1 => {
                let lnf = ln_factorials(len);
                vec![
                    (fock_product(&u, &u, &lnf), 0),
                    (fock_product(&u, &w, &lnf), 0),
                    (fock_product(&w, &w, &lnf), -2),
                ]
            }
        };
        Ok(Self { comps })
    }

    /// Amplitudes (first `m`) of every component of level `n`. Levels with
    /// `n < 0` are allowed; their negative powers are dropped.
    pub fn level(&self, n: i64, m: usize) -> Vec<Vec<f64>> {
        self.comps
            .iter()
            .map(|(c, offset)| {
                let mut amps = fock_shift(c, 2 * n + offset);
                amps.resize(m, 0.0);
                amps
            })
            .collect()
    }

    /// Whether level `n` has a nonzero coefficient at a negative power.
    pub fn singular_level(&self, n: i64) -> bool {
        self.comps.iter().any(|(c, offset)| {
            let shift = 2 * n + offset;
            shift < 0 && c.iter().take((-shift) as usize).any(|x| *x != 0.0)
        })
    }
}

/// Fock amplitudes of every basis function at truncation `m`, grouped by
/// level as in [`level_vectors`]. Uses the `sqrt(k!)`-scaled recurrence so
/// large `m` never overflows.
pub fn fock_basis(p: &SubspaceParams, m: usize) -> Result<Vec<Vec<FockVector>>> {
    let comps = FockComponents::new(p, m + 2)?;
    (0..=p.n as i64)
        .map(|n| {
            if comps.singular_level(n) {
                return Err(QesError::NonAnalytic { power: -1 });
            }
            Ok(comps.level(n, m).into_iter().map(FockVector::from_amps).collect())
        })
        .collect()
}

/// Multiplication by `z^shift` on `sqrt(k!)`-scaled coefficients
/// (`a+^shift` in the Fock basis; negative shifts drop the low powers).
pub fn fock_shift(c: &[f64], shift: i64) -> Vec<f64> {
    let len = c.len();
    let mut out = vec![0.0; len];
    if shift >= 0 {
        let s = shift as usize;
        for k in 0..len.saturating_sub(s) {
            let mut factor = 1.0;
            for j in k + 1..=k + s {
                factor *= (j as f64).sqrt();
            }
            out[k + s] = c[k] * factor;
        }
    } else {
        let s = (-shift) as usize;
        for k in s..len {
            let mut factor = 1.0;
            for j in k - s + 1..=k {
                factor *= (j as f64).sqrt();
            }
            out[k - s] = c[k] / factor;
        }
    }
    out
}

/// Product of two functions given by `sqrt(k!)`-scaled coefficients.
fn fock_product(a: &[f64], b: &[f64], lnf: &[f64]) -> Vec<f64> {
    let len = a.len().min(b.len());
    (0..len)
        .map(|n| {
            (0..=n)
                .filter(|&i| a[i] != 0.0 && b[n - i] != 0.0)
                .map(|i| (0.5 * (lnf[n] - lnf[i] - lnf[n - i])).exp() * a[i] * b[n - i])
                .sum()
        })
        .collect()
}

/// Coefficients of the effective Kratzer equation
/// `Psi'' + (eps - k/z^2 - (rho - tau)^2 z^2) Psi = 0` for `u` and its
/// partner for `v`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KratzerForm {
    #[serde(serialize_with = "crate::scalar::rational_serde::serialize")]
    pub k: Rational,
    #[serde(serialize_with = "crate::scalar::rational_serde::serialize")]
    pub k_tilde: Rational,
    #[serde(serialize_with = "crate::scalar::rational_serde::serialize")]
    pub eps: Rational,
    #[serde(serialize_with = "crate::scalar::rational_serde::serialize")]
    pub eps_tilde: Rational,
}

pub fn kratzer_form(p: &SubspaceParams) -> KratzerForm {
    let ag = p.alpha.clone() * p.gamma.clone();
    let one = q(1, 1);
    let two = q(2, 1);
    let four = q(4, 1);
    let db = p.delta.clone() - p.beta.clone();
    let bd = -db.clone();
    let k = db.clone() * (db.clone() + two.clone()) / four.clone();
    let k_tilde = bd.clone() * (bd.clone() + two.clone()) / four;
    let eps = (p.rho.clone() - p.tau.clone()) * (db - one.clone()) - ag.clone();
    let eps_tilde = (p.tau.clone() - p.rho.clone()) * (bd - one) - ag;
    assert_eq!(
        eps_tilde.clone() - eps.clone(),
        two * (p.rho.clone() - p.tau.clone()),
        "Kratzer energies must differ by 2(rho - tau)"
    );
    KratzerForm { k, k_tilde, eps, eps_tilde }
}

/// Exact Taylor series of `exp(c z^2)` up to `z^max_power`.
pub fn gaussian_series(c: &Rational, max_power: i64) -> BargmannSeries<Rational> {
    let mut coeffs = vec![q(0, 1); (max_power + 1).max(0) as usize];
    let mut term = q(1, 1);
    let mut m = 0i64;
    while 2 * m <= max_power {
        coeffs[(2 * m) as usize] = term.clone();
        m += 1;
        term = term * c.clone() / q(m, 1);
    }
    BargmannSeries::from_coeffs(coeffs)
}

/// Residuals of the effective equation for `Psi = u z^-s exp(-sigma z^2)`
/// and `Psi~ = v z^-s exp(-sigma z^2)` with `s = (beta + delta)/2`,
/// `sigma = (rho + tau)/2`. Returns `None` when `s` is not an integer.
pub fn kratzer_residual(
    p: &SubspaceParams,
    u: &BargmannSeries<Rational>,
    v: &BargmannSeries<Rational>,
) -> Option<(Rational, Rational)> {
    let s = as_i64(&((p.beta.clone() + p.delta.clone()) / q(2, 1)))?;
    let kf = kratzer_form(p);
    let sigma = (p.rho.clone() + p.tau.clone()) / q(2, 1);
    let d2 = (p.rho.clone() - p.tau.clone()) * (p.rho.clone() - p.tau.clone());
    let check = |f: &BargmannSeries<Rational>, k: &Rational, eps: &Rational| {
        let g = gaussian_series(&-sigma.clone(), f.max_power());
        let psi = f.mul(&g).shift(-s);
        let lhs = psi
            .derivative()
            .derivative()
            .combine(&psi, eps.clone())
            .combine(&psi.shift(-2), -k.clone())
            .combine(&psi.shift(2), -d2.clone());
        // The last two orders are contaminated by truncation of psi''.
        lhs.truncate(lhs.max_power() - 2).max_abs()
    };
    Some((check(u, &kf.k, &kf.eps), check(v, &kf.k_tilde, &kf.eps_tilde)))
}

/// Residuals of the coupled system on a series pair, through `z^(K-3)`.
pub fn ode_residual<S: Scalar>(p: &SubspaceParams, u: &BargmannSeries<S>, v: &BargmannSeries<S>) -> (S, S) {
    let a = S::from_rational(&p.alpha);
    let b = S::from_rational(&p.beta);
    let g = S::from_rational(&p.gamma);
    let d = S::from_rational(&p.delta);
    let two_rho = S::from_rational(&(p.rho.clone() * q(2, 1)));
    let two_tau = S::from_rational(&(p.tau.clone() * q(2, 1)));
    let hi = u.max_power().min(v.max_power() + 1) - 2;
    let ru =
        u.derivative().combine(v, -a).combine(&u.shift(-1), -b).combine(&u.shift(1), -two_rho).truncate(hi);
    let rv =
        v.derivative().combine(u, -g).combine(&v.shift(-1), -d).combine(&v.shift(1), -two_tau).truncate(hi);
    (ru.max_abs(), rv.max_abs())
}

/// Residuals of the decoupled second-order equations for `u` and `v`.
pub fn second_order_residual(
    p: &SubspaceParams,
    u: &BargmannSeries<Rational>,
    v: &BargmannSeries<Rational>,
) -> (Rational, Rational) {
    let (a, b, g, d) = (&p.alpha, &p.beta, &p.gamma, &p.delta);
    let (r, t) = (&p.rho, &p.tau);
    let two = q(2, 1);
    let c1 = -(b.clone() + d.clone());
    let c2 = -two.clone() * (r.clone() + t.clone());
    let common = two.clone() * r.clone() * d.clone() - a.clone() * g.clone();
    let quartic = q(4, 1) * r.clone() * t.clone();
    let eq = |f: &BargmannSeries<Rational>, barrier: Rational, constant: Rational| {
        let fp = f.derivative();
        let lhs = fp
            .derivative()
            .combine(&fp.shift(-1), c1.clone())
            .combine(&fp.shift(1), c2.clone())
            .combine(&f.shift(-2), barrier)
            .combine(&f.shift(2), quartic.clone())
            .combine(f, constant);
        lhs.truncate(lhs.max_power() - 2).max_abs()
    };
    let ru = eq(
        u,
        b.clone() * (q(1, 1) + d.clone()),
        two.clone() * b.clone() * t.clone() + common.clone() - two.clone() * r.clone(),
    );
    let rv = eq(
        v,
        d.clone() * (q(1, 1) + b.clone()),
        two.clone() * t.clone() * b.clone() + common - two * t.clone(),
    );
    (ru, rv)
}

/// Residual of the confluent-hypergeometric recurrence
/// `(m+1)(m+eta) y_(m+1) = (m+xi) y_m` for `u = y((tau-rho) z^2) e^(rho z^2) z^beta`
/// on the `u`-seeded branch (`rho != tau`, `alpha gamma != 0`).
pub fn kummer_residual(p: &SubspaceParams, u: &BargmannSeries<Rational>) -> Option<Rational> {
    let beta = as_i64(&p.beta)?;
    let diff = p.tau.clone() - p.rho.clone();
    if diff == q(0, 1) {
        return None;
    }
    let eta = (p.beta.clone() - p.delta.clone() + q(1, 1)) / q(2, 1);
    let xi = p.alpha.clone() * p.gamma.clone() / (q(4, 1) * diff.clone());
    let g = gaussian_series(&-p.rho.clone(), u.max_power());
    let s = u.mul(&g).shift(-beta);
    let top = s.max_power() / 2;
    let mut worst = q(0, 1);
    let mut scale = q(1, 1);
    let mut y = Vec::new();
    for m in 0..=top {
        y.push(s.coeff(2 * m) / scale.clone());
        scale *= diff.clone();
        let odd = s.coeff(2 * m + 1).abs();
        if odd > worst {
            worst = odd;
        }
    }
    for m in 0..y.len().saturating_sub(1) {
        let mr = q(m as i64, 1);
        let lhs = (mr.clone() + q(1, 1)) * (mr.clone() + eta.clone()) * y[m + 1].clone();
        let r = (lhs - (mr + xi.clone()) * y[m].clone()).abs();
        if r > worst {
            worst = r;
        }
    }
    Some(worst)
}

/// Oscillator-level pair for `beta = delta = tau = 0`, `alpha = 1`,
/// `gamma = -2 rho (n + 1)`: `u = Psi_n e^(rho z^2/2)` with
/// `Psi_n = e^(-rho z^2/2) H_n(z sqrt(rho))`.
#[derive(Clone, Debug)]
pub struct HermiteFixture {
    pub params: SubspaceParams,
    pub u: BargmannSeries<Rational>,
    pub v: BargmannSeries<Rational>,
    /// Max coefficient of `Psi' - rho z Psi - alpha Psi~`.
    pub lowering_residual: Rational,
    /// Max coefficient of `Psi~' + rho z Psi~ - gamma Psi`.
    pub raising_residual: Rational,
}

pub fn hermite_fixture(level: usize, rho: &Rational, len: usize) -> Result<HermiteFixture> {
    if *rho <= q(0, 1) {
        return Err(QesError::Inadmissible(vec!["oscillator fixture requires rho > 0".into()]));
    }
    let gamma = -q(2, 1) * rho.clone() * q(level as i64 + 1, 1);
    let seed = if level.is_multiple_of(2) { Seed::U } else { Seed::V };
    let params =
        SubspaceParams::spin_half(q(1, 1), q(0, 1), gamma, q(0, 1), rho.clone(), q(0, 1), 0).with_seed(seed);
    let (u, v) = solve_uv::<Rational>(&params, len)?;
    let g = gaussian_series(&(-rho.clone() / q(2, 1)), u.max_power());
    let psi = u.mul(&g);
    let psi_t = v.mul(&g).truncate(psi.max_power() - 1);
    let psi = psi.truncate(psi.max_power() - 1);
    let hi = psi.max_power().min(psi_t.max_power()) - 1;
    let lowering = psi
        .derivative()
        .combine(&psi.shift(1), -rho.clone())
        .combine(&psi_t, -params.alpha.clone())
        .truncate(hi)
        .max_abs();
    let raising = psi_t
        .derivative()
        .combine(&psi_t.shift(1), rho.clone())
        .combine(&psi, -params.gamma.clone())
        .truncate(hi)
        .max_abs();
    Ok(HermiteFixture { params, u, v, lowering_residual: lowering, raising_residual: raising })
}

/// `H_n(x sqrt(rho))` with the overall `rho^(n/2)` dropped, as a rational
/// polynomial in `x` normalised to leading coefficient 1 at its lowest power.
pub fn hermite_profile(level: usize, rho: &Rational) -> BargmannSeries<Rational> {
    // H_(k+1)(y) = 2 y H_k - 2 k H_(k-1); with y = x sqrt(rho) every
    // coefficient of x^m in H_k carries rho^(m/2).
    let mut prev = vec![q(0, 1); level + 2];
    let mut cur = vec![q(0, 1); level + 2];
    cur[0] = q(1, 1);
    for k in 0..level {
        let mut next = vec![q(0, 1); level + 2];
        for m in 0..=k {
            next[m + 1] = next[m + 1].clone() + q(2, 1) * cur[m].clone();
            if k > 0 {
                next[m] = next[m].clone() - q(2 * k as i64, 1) * prev[m].clone();
            }
        }
        prev = cur;
        cur = next;
    }
    // Coefficient of x^m in H_n(x sqrt rho) is cur[m] rho^(m/2); relative to
    // the lowest power m0 the factor is rho^((m - m0)/2), always rational.
    let m0 = cur.iter().position(|c| !c.is_zero()).unwrap_or(0);
    let mut out = vec![q(0, 1); level + 1];
    for (m, c) in cur.iter().enumerate().take(level + 1) {
        if c.is_zero() {
            continue;
        }
        let mut r = c.clone() / cur[m0].clone();
        for _ in 0..(m - m0) / 2 {
            r *= rho.clone();
        }
        out[m] = r;
    }
    BargmannSeries::from_coeffs(out)
}

/// Rescales a series so its lowest nonzero coefficient is 1.
pub fn normalise_leading(f: &BargmannSeries<Rational>) -> BargmannSeries<Rational> {
    match f.leading_power() {
        Some(p) => f.scale(&(q(1, 1) / f.coeff(p))),
        None => f.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half(a: i64, b: i64, g: i64, d: i64) -> SubspaceParams {
        SubspaceParams::spin_half(q(a, 1), q(b, 1), q(g, 1), q(d, 1), q(0, 1), q(0, 1), 1)
    }

    #[test]
    fn decoupled_pair_is_admissible() {
        let p = SubspaceParams::spin_half(q(0, 1), q(0, 1), q(0, 1), q(-1, 1), q(3, 10), q(1, 10), 0);
        let a = admissible(&p);
        assert!(a.ok, "{:?}", a.reasons);
        assert_eq!(a.seed, Some(Seed::Both));
    }

    #[test]
    fn resonance_is_rejected() {
        let a = admissible(&half(1, 1, 0, 0));
        assert!(!a.ok);
        assert!(a.reasons.iter().any(|r| r.contains("logarithmic resonance")), "{:?}", a.reasons);
        let b = admissible(&half(0, 0, 1, 1));
        assert!(!b.ok);
        assert!(b.reasons.iter().any(|r| r.contains("logarithmic resonance")));
    }

    #[test]
    fn normalizability_is_checked() {
        let mut p = half(0, 0, 0, 0);
        p.rho = q(1, 2);
        let a = admissible(&p);
        assert!(!a.ok);
        assert!(a.reasons.iter().any(|r| r.contains("normalizability")));
    }

    #[test]
    fn spin0_gaussian_coefficients() {
        let p = SubspaceParams::spin0(q(0, 1), q(1, 4), 0);
        let (u, _) = solve_uv::<Rational>(&p, 10).unwrap();
        assert_eq!(&u.coeffs()[..5], &[q(1, 1), q(0, 1), q(1, 4), q(0, 1), q(1, 32)]);
        assert_eq!(u.coeffs(), gaussian_series(&q(1, 4), 9).coeffs());
    }

    #[test]
    fn non_integer_delta_uses_u_branch() {
        let p = SubspaceParams::spin_half(q(1, 3), q(0, 1), q(1, 4), q(1, 3), q(0, 1), q(1, 10), 1);
        assert_eq!(admissible(&p).seed, Some(Seed::U));
        let (u, v) = solve_uv::<Rational>(&p, 40).unwrap();
        assert_eq!(u.leading_power(), Some(0));
        assert_eq!(v.leading_power(), Some(1));
        let (ru, rv) = ode_residual(&p, &u, &v);
        assert!(ru.is_zero() && rv.is_zero());
    }

    #[test]
    fn fock_shift_matches_monomial_scaling() {
        // z * z^2 = z^3: sqrt(2!) -> sqrt(3!)
        let mut c = vec![0.0; 6];
        c[2] = 2f64.sqrt();
        let s = fock_shift(&c, 1);
        assert!((s[3] - 6f64.sqrt()).abs() < 1e-14);
        let back = fock_shift(&s, -1);
        assert!((back[2] - c[2]).abs() < 1e-14);
    }

    #[test]
    fn hermite_profile_low_levels() {
        let rho = q(1, 4);
        // H_2(y) = 4y^2 - 2 -> normalised 1 - 2 rho x^2
        assert_eq!(hermite_profile(2, &rho).coeffs(), &[q(1, 1), q(0, 1), q(-1, 2)]);
        // H_3(y) = 8y^3 - 12y -> normalised x - (2/3) rho x^3
        assert_eq!(hermite_profile(3, &rho).coeff(3), q(-1, 6));
    }
}
