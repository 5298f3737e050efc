//! Hamiltonian coefficients, Hermiticity and Fock-space assembly.

use serde::{Deserialize, Serialize};

use crate::error::{QesError, Result};
use crate::fock::{build_generators, FockOperator, Generators};
use crate::scalar::{format_rational, q, Rational, Scalar};

/// Smallest truncation accepted by [`assemble_fock`].
pub const MIN_MODEL_TRUNCATION: usize = 12;

/// Coefficients of
/// `a_pp K+^2 + a_mm K-^2 + a_00 K0^2 + a_0m K0 K- + a_p0 K+ K0 + a_0 K0 + a_m K- + a_p K+`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianCoeffs {
    #[serde(with = "crate::scalar::rational_serde", default = "zero")]
    pub a_pp: Rational,
    #[serde(with = "crate::scalar::rational_serde", default = "zero")]
    pub a_mm: Rational,
    #[serde(with = "crate::scalar::rational_serde", default = "zero")]
    pub a_00: Rational,
    #[serde(with = "crate::scalar::rational_serde", default = "zero")]
    pub a_0m: Rational,
    #[serde(with = "crate::scalar::rational_serde", default = "zero")]
    pub a_p0: Rational,
    #[serde(with = "crate::scalar::rational_serde", default = "zero")]
    pub a_0: Rational,
    #[serde(with = "crate::scalar::rational_serde", default = "zero")]
    pub a_m: Rational,
    #[serde(with = "crate::scalar::rational_serde", default = "zero")]
    pub a_p: Rational,
}

fn zero() -> Rational {
    q(0, 1)
}

/// Names in storage order.
pub const COEFF_NAMES: [&str; 8] = ["a_pp", "a_mm", "a_00", "a_0m", "a_p0", "a_0", "a_m", "a_p"];

impl Default for HamiltonianCoeffs {
    fn default() -> Self {
        Self::from_array(std::array::from_fn(|_| zero()))
    }
}

impl HamiltonianCoeffs {
    /// From `[a_pp, a_mm, a_00, a_0m, a_p0, a_0, a_m, a_p]`.
    pub fn from_array(c: [Rational; 8]) -> Self {
        let [a_pp, a_mm, a_00, a_0m, a_p0, a_0, a_m, a_p] = c;
        Self { a_pp, a_mm, a_00, a_0m, a_p0, a_0, a_m, a_p }
    }

    pub fn from_ints(c: [i64; 8]) -> Self {
        Self::from_array(c.map(|x| q(x, 1)))
    }

    pub fn to_array(&self) -> [Rational; 8] {
        [
            self.a_pp.clone(),
            self.a_mm.clone(),
            self.a_00.clone(),
            self.a_0m.clone(),
            self.a_p0.clone(),
            self.a_0.clone(),
            self.a_m.clone(),
            self.a_p.clone(),
        ]
    }

    pub fn get(&self, name: &str) -> Option<&Rational> {
        Some(match name {
            "a_pp" => &self.a_pp,
            "a_mm" => &self.a_mm,
            "a_00" => &self.a_00,
            "a_0m" => &self.a_0m,
            "a_p0" => &self.a_p0,
            "a_0" => &self.a_0,
            "a_m" => &self.a_m,
            "a_p" => &self.a_p,
            _ => return None,
        })
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Rational> {
        Some(match name {
            "a_pp" => &mut self.a_pp,
            "a_mm" => &mut self.a_mm,
            "a_00" => &mut self.a_00,
            "a_0m" => &mut self.a_0m,
            "a_p0" => &mut self.a_p0,
            "a_0" => &mut self.a_0,
            "a_m" => &mut self.a_m,
            "a_p" => &mut self.a_p,
            _ => return None,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| QesError::Config(format!("model file: {e}")))
    }

    pub fn max_abs(&self) -> Rational {
        Scalar::max_abs(&self.to_array())
    }

    /// `self + t * other`, coefficient-wise.
    pub fn axpy(&self, t: &Rational, other: &Self) -> Self {
        let a = self.to_array();
        let b = other.to_array();
        Self::from_array(std::array::from_fn(|i| a[i].clone() + t.clone() * b[i].clone()))
    }

    /// Shifts the linear couplings `a_m` and `a_p` by `rel * max(|a|, 1)`.
    /// Moving both keeps a Hermitian model Hermitian, and `a_p` enters
    /// `D1(N)` through `C+ = 1/2` even when every Gaussian weight vanishes,
    /// so the cut-off is broken for every family.
    pub fn perturb(&self, rel: &Rational) -> Self {
        let one = q(1, 1);
        let bump = |a: &Rational| {
            let scale = if a.abs() > one { a.abs() } else { one.clone() };
            a.clone() + rel.clone() * scale
        };
        let mut out = self.clone();
        out.a_m = bump(&self.a_m);
        out.a_p = bump(&self.a_p);
        out
    }

    pub fn to_strings(&self) -> Vec<(&'static str, String)> {
        COEFF_NAMES.iter().copied().zip(self.to_array().iter().map(format_rational)).collect()
    }
}

/// Outcome of [`hermitian_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HermitianCheck {
    pub hermitian: bool,
    pub violations: Vec<String>,
}

/// With real coefficients `H` is self-adjoint iff the `K+`/`K-` terms pair
/// up: `a_pp = a_mm`, `a_p = a_m`, `a_p0 = a_0m`.
pub fn hermitian_check(h: &HamiltonianCoeffs) -> HermitianCheck {
    let mut violations = Vec::new();
    for (l, r, name) in
        [(&h.a_pp, &h.a_mm, "a_pp ≠ a_mm"), (&h.a_p, &h.a_m, "a_p ≠ a_m"), (&h.a_p0, &h.a_0m, "a_p0 ≠ a_0m")]
    {
        if l != r {
            violations.push(name.to_string());
        }
    }
    HermitianCheck { hermitian: violations.is_empty(), violations }
}

/// Assembles `H` from the generators with the operator order as written
/// (`K0 K-` applies `K-` first).
pub fn assemble_from<S: Scalar>(h: &HamiltonianCoeffs, g: &Generators<S>) -> FockOperator<S> {
    let m = g.k0.dim();
    let c = |r: &Rational| S::from_rational(r);
    let terms: [(&Rational, FockOperator<S>); 8] = [
        (&h.a_pp, g.k_plus.mul(&g.k_plus)),
        (&h.a_mm, g.k_minus.mul(&g.k_minus)),
        (&h.a_00, g.k0.mul(&g.k0)),
        (&h.a_0m, g.k0.mul(&g.k_minus)),
        (&h.a_p0, g.k_plus.mul(&g.k0)),
        (&h.a_0, g.k0.clone()),
        (&h.a_m, g.k_minus.clone()),
        (&h.a_p, g.k_plus.clone()),
    ];
    let mut out = FockOperator::zeros(m, 4);
    for (coef, op) in terms {
        if !num_traits::Zero::is_zero(coef) {
            out = out.add(&op.scale(&c(coef)));
        }
    }
    out
}

pub fn assemble_fock<S: Scalar>(h: &HamiltonianCoeffs, m: usize) -> Result<FockOperator<S>> {
    if m < MIN_MODEL_TRUNCATION {
        return Err(QesError::TruncationTooSmall { got: m, min: MIN_MODEL_TRUNCATION });
    }
    Ok(assemble_from(h, &build_generators::<S>(m)?))
}
