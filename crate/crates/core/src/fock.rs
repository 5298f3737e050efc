//! Truncated Fock-space realisation of the boson ladder and the sl(2,R)
//! generators `K0 = (a+a + 1/2)/2`, `K- = a^2/2`, `K+ = a+^2/2`.
//!
//! Operators are stored as banded matrices. Truncation to `M` states only
//! corrupts the last few rows, so operator identities are checked on the
//! interior block (indices `< M - 4`).

use crate::error::{QesError, Result};
use crate::scalar::{ln_factorials, Scalar};
use crate::series::BargmannSeries;

/// Smallest truncation for which the interior block is non-empty.
pub const MIN_TRUNCATION: usize = 8;
/// Rows/columns excluded from identity checks (bandwidth of K-products).
pub const INTERIOR_MARGIN: usize = 4;

/// Banded `dim x dim` matrix; `bands[o + width][r]` holds entry `(r, r + o)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator<S> {
    dim: usize,
    width: usize,
    bands: Vec<Vec<S>>,
}

impl<S: Scalar> FockOperator<S> {
    pub fn zeros(dim: usize, width: usize) -> Self {
        Self { dim, width, bands: vec![vec![S::zero(); dim]; 2 * width + 1] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim, 0);
        op.bands[0] = vec![S::one(); dim];
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Half-bandwidth actually occupied by nonzero entries.
    pub fn bandwidth(&self) -> usize {
        (0..=self.width)
            .rev()
            .find(|&w| {
                let hi = &self.bands[self.width + w];
                let lo = &self.bands[self.width - w];
                hi.iter().chain(lo).any(|x| !x.is_zero())
            })
            .unwrap_or(0)
    }

    pub fn get(&self, row: usize, col: usize) -> S {
        let off = col as isize - row as isize;
        if off.unsigned_abs() > self.width || row >= self.dim || col >= self.dim {
            return S::zero();
        }
        self.bands[(off + self.width as isize) as usize][row].clone()
    }

    pub fn set(&mut self, row: usize, col: usize, value: S) {
        let off = col as isize - row as isize;
        assert!(off.unsigned_abs() <= self.width, "entry outside band");
        self.bands[(off + self.width as isize) as usize][row] = value;
    }

    fn widen(&self, width: usize) -> Self {
        if width <= self.width {
            return self.clone();
        }
        let mut out = Self::zeros(self.dim, width);
        for (i, band) in self.bands.iter().enumerate() {
            out.bands[i + width - self.width] = band.clone();
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &Self, f: impl Fn(S, S) -> S) -> Self {
        assert_eq!(self.dim, other.dim);
        let w = self.width.max(other.width);
        let (a, b) = (self.widen(w), other.widen(w));
        let bands = a
            .bands
            .into_iter()
            .zip(b.bands)
            .map(|(x, y)| x.into_iter().zip(y).map(|(p, q)| f(p, q)).collect())
            .collect();
        Self { dim: self.dim, width: w, bands }
    }

    pub fn scale(&self, factor: &S) -> Self {
        let bands =
            self.bands.iter().map(|b| b.iter().map(|x| x.clone() * factor.clone()).collect()).collect();
        Self { dim: self.dim, width: self.width, bands }
    }

    /// Matrix product `self * other` (so `other` acts first on a ket).
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let w = self.width + other.width;
        let mut out = Self::zeros(self.dim, w);
        let (wa, wb) = (self.width as isize, other.width as isize);
        for oa in -wa..=wa {
            let band_a = &self.bands[(oa + wa) as usize];
            for ob in -wb..=wb {
                let band_b = &other.bands[(ob + wb) as usize];
                let target = &mut out.bands[(oa + ob + w as isize) as usize];
                for (r, x) in band_a.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    let k = r as isize + oa;
                    let c = k + ob;
                    if k < 0 || k >= self.dim as isize || c < 0 || c >= self.dim as isize {
                        continue;
                    }
                    let y = &band_b[k as usize];
                    if !y.is_zero() {
                        target[r] = target[r].clone() + x.clone() * y.clone();
                    }
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn apply(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.dim);
        let w = self.width as isize;
        (0..self.dim)
            .map(|r| {
                let mut acc = S::zero();
                for o in -w..=w {
                    let c = r as isize + o;
                    if c < 0 || c >= self.dim as isize {
                        continue;
                    }
                    let a = &self.bands[(o + w) as usize][r];
                    if !a.is_zero() && !x[c as usize].is_zero() {
                        acc = acc + a.clone() * x[c as usize].clone();
                    }
                }
                acc
            })
            .collect()
    }

    /// Largest `|entry|` over rows and columns `< dim - margin`.
    pub fn interior_max_abs(&self, margin: usize) -> S {
        let lim = self.dim.saturating_sub(margin);
        let mut best = S::zero();
        for r in 0..lim {
            for c in r.saturating_sub(self.width)..(r + self.width + 1).min(lim) {
                let v = self.get(r, c).abs();
                if v > best {
                    best = v;
                }
            }
        }
        best
    }

    /// Whether the interior block is self-adjoint with respect to the
    /// backend's metric: `<m|m> H[m][n] == <n|n> H[n][m]`.
    pub fn interior_self_adjoint(&self, margin: usize, tol: f64) -> bool {
        let lim = self.dim.saturating_sub(margin);
        for r in 0..lim {
            for c in r + 1..(r + self.width + 1).min(lim) {
                let lhs = S::metric(r) * self.get(r, c);
                let rhs = S::metric(c) * self.get(c, r);
                if S::EXACT {
                    if lhs != rhs {
                        return false;
                    }
                } else if (lhs - rhs).abs().to_f64() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_f64(&self) -> FockOperator<f64> {
        FockOperator {
            dim: self.dim,
            width: self.width,
            bands: self.bands.iter().map(|b| b.iter().map(S::to_f64).collect()).collect(),
        }
    }
}

impl FockOperator<f64> {
    /// Dense copy restricted to indices with the given parity.
    pub fn parity_block(&self, parity: usize) -> nalgebra::DMatrix<f64> {
        let idx: Vec<usize> = (parity..self.dim).step_by(2).collect();
        nalgebra::DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.get(idx[i], idx[j]))
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }
}

/// The ladder operators, the sl(2,R) generators and the Casimir at one
/// truncation.
#[derive(Clone, Debug)]
pub struct Generators<S> {
    pub a: FockOperator<S>,
    pub a_dag: FockOperator<S>,
    pub k0: FockOperator<S>,
    pub k_plus: FockOperator<S>,
    pub k_minus: FockOperator<S>,
    pub casimir: FockOperator<S>,
}

pub fn build_generators<S: Scalar>(m: usize) -> Result<Generators<S>> {
    if m < MIN_TRUNCATION {
        return Err(QesError::TruncationTooSmall { got: m, min: MIN_TRUNCATION });
    }
    let mut a = FockOperator::zeros(m, 1);
    let mut a_dag = FockOperator::zeros(m, 1);
    for n in 1..m {
        a.set(n - 1, n, S::lowering(n));
        a_dag.set(n, n - 1, S::raising(n - 1));
    }
    let half = S::half();
    let number = a_dag.mul(&a);
    let k0 = number.add(&FockOperator::identity(m).scale(&half)).scale(&half);
    let k_minus = a.mul(&a).scale(&half);
    let k_plus = a_dag.mul(&a_dag).scale(&half);
    let casimir = k0.mul(&k0).sub(&k_plus.mul(&k_minus).add(&k_minus.mul(&k_plus)).scale(&half));
    Ok(Generators { a, a_dag, k0, k_plus, k_minus, casimir })
}

/// Interior deviations from the sl(2,R) relations.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorResiduals<S> {
    /// `max |[K0, K+] - K+|, |[K0, K-] + K-|`.
    pub r1: S,
    /// `max |[K+, K-] + 2 K0|`.
    pub r2: S,
    /// `max |C + 3/16|` on the diagonal.
    pub casimir: S,
}

pub fn commutator_residuals<S: Scalar>(g: &Generators<S>) -> CommutatorResiduals<S> {
    let m = INTERIOR_MARGIN;
    let plus = g.k0.commutator(&g.k_plus).sub(&g.k_plus).interior_max_abs(m);
    let minus = g.k0.commutator(&g.k_minus).add(&g.k_minus).interior_max_abs(m);
    let two = S::from_i64(2);
    let r2 = g.k_plus.commutator(&g.k_minus).add(&g.k0.scale(&two)).interior_max_abs(m);
    let shifted = g.casimir.add(&FockOperator::identity(g.casimir.dim()).scale(&S::ratio(3, 16)));
    let casimir = shifted.interior_max_abs(m);
    CommutatorResiduals { r1: if plus > minus { plus } else { minus }, r2, casimir }
}

/// Amplitudes `c_n = sqrt(n!) a_n` of a Bargmann function in the orthonormal
/// Fock basis, with norm and tail diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    pub amps: Vec<f64>,
    pub norm_sq: f64,
    /// Estimated `sum_{n >= M} |c_n|^2`; infinite when the tail does not decay.
    pub tail_estimate: f64,
}

impl FockVector {
    pub fn from_amps(amps: Vec<f64>) -> Self {
        let norm_sq = amps.iter().map(|c| c * c).sum();
        let tail_estimate = tail_estimate(&amps);
        Self { amps, norm_sq, tail_estimate }
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn diverging(&self) -> bool {
        norm_growth(&self.amps) == NormGrowth::Diverging
    }
}

/// Geometric extrapolation of the last ten squared amplitudes, grouped in
/// pairs so that series with a fixed parity are handled.
pub fn tail_estimate(amps: &[f64]) -> f64 {
    let m = amps.len();
    if m < 10 {
        return 0.0;
    }
    let sq: Vec<f64> = amps[m - 10..].iter().map(|c| c * c).collect();
    let pairs: Vec<f64> = sq.chunks(2).map(|p| p[0] + p[1]).collect();
    let (first, last) = (pairs[0], pairs[4]);
    if last == 0.0 {
        return 0.0;
    }
    if first == 0.0 {
        return f64::INFINITY;
    }
    let r = (last / first).powf(0.25);
    if r >= 1.0 {
        f64::INFINITY
    } else {
        last * r / (1.0 - r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormGrowth {
    Converging,
    Diverging,
}

/// Monotone-growth test on partial norms at `M/4`, `M/2` and `M`: the
/// increments of a convergent Bargmann norm shrink geometrically, so an
/// increment that does not at least halve flags divergence at this
/// truncation.
pub fn norm_growth(amps: &[f64]) -> NormGrowth {
    let m = amps.len();
    if m < 8 {
        return NormGrowth::Converging;
    }
    let partial = |k: usize| amps[..k].iter().map(|c| c * c).sum::<f64>();
    let (s1, s2, s3) = (partial(m / 4), partial(m / 2), partial(m));
    let (d1, d2) = (s2 - s1, s3 - s2);
    if !s3.is_finite() || (d2 > 0.0 && d2 >= 0.5 * d1) {
        NormGrowth::Diverging
    } else {
        NormGrowth::Converging
    }
}

/// Cut-off below which `sqrt(n!) a_n` is evaluated directly; beyond it the
/// factorial is handled in the log domain.
const DIRECT_FACTORIAL_LIMIT: usize = 150;

pub fn bargmann_to_fock<S: Scalar>(series: &BargmannSeries<S>, m: usize) -> Result<FockVector> {
    if let Some(p) = series.leading_power() {
        if p < 0 {
            return Err(QesError::NonAnalytic { power: p });
        }
    }
    let available = series.max_power() + 1;
    if available < m as i64 {
        return Err(QesError::SeriesTooShort { len: available.max(0) as usize, needed: m });
    }
    let lnf = ln_factorials(m);
    let mut amps = Vec::with_capacity(m);
    let mut sqrt_fact = 1.0f64;
    for (n, lf) in lnf.iter().enumerate().take(m) {
        if n > 0 {
            sqrt_fact *= (n as f64).sqrt();
        }
        let a = series.coeff(n as i64);
        if a.is_zero() {
            amps.push(0.0);
            continue;
        }
        let direct = a.to_f64();
        if n <= DIRECT_FACTORIAL_LIMIT && direct.is_normal() {
            amps.push(direct * sqrt_fact);
        } else {
            let sign = if a > S::zero() { 1.0 } else { -1.0 };
            amps.push(sign * (a.ln_abs() + 0.5 * lf).exp());
        }
    }
    Ok(FockVector::from_amps(amps))
}
