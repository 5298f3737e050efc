//! Arithmetic backends.
//!
//! Every algebraic routine is generic over [`Scalar`], implemented for exact
//! [`Rational`] numbers and for `f64`. The two backends also carry their own
//! realisation of the boson ladder: `f64` uses the orthonormal Fock basis
//! (`a|n> = sqrt(n)|n-1>`), while the exact backend uses the monomial basis
//! `z^n` of the Bargmann space (`a z^n = n z^(n-1)`, `<z^n|z^n> = n!`). The
//! two are related by the diagonal similarity `diag(sqrt(n!))`, so commutators,
//! diagonals and spectra agree.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{QesError, Result};

pub type Rational = BigRational;

pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    /// Nearest representable value (exact dyadic for rationals).
    fn from_f64_lossy(x: f64) -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
    /// `ln|x|`, finite even when `x` is outside the `f64` range.
    fn ln_abs(&self) -> f64;

    /// `<n-1| a |n>` in this backend's basis.
    fn lowering(n: usize) -> Self;
    /// `<n+1| a+ |n>` in this backend's basis.
    fn raising(n: usize) -> Self;
    /// `<n|n>` in this backend's basis.
    fn metric(n: usize) -> Self;

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn half() -> Self {
        Self::ratio(1, 2)
    }

    fn max_abs<'a, I: IntoIterator<Item = &'a Self>>(items: I) -> Self {
        items.into_iter().map(Self::abs).fold(Self::zero(), |acc, x| if x > acc { x } else { acc })
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn from_f64_lossy(x: f64) -> Self {
        x
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn ln_abs(&self) -> f64 {
        f64::abs(*self).ln()
    }
    fn lowering(n: usize) -> Self {
        (n as f64).sqrt()
    }
    fn raising(n: usize) -> Self {
        ((n + 1) as f64).sqrt()
    }
    fn metric(_n: usize) -> Self {
        1.0
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn from_f64_lossy(x: f64) -> Self {
        BigRational::from_float(x).unwrap_or_else(Zero::zero)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn ln_abs(&self) -> f64 {
        bigint_ln_abs(self.numer()) - bigint_ln_abs(self.denom())
    }
    fn lowering(n: usize) -> Self {
        Self::from_i64(n as i64)
    }
    fn raising(_n: usize) -> Self {
        One::one()
    }
    fn metric(n: usize) -> Self {
        let mut acc = BigInt::one();
        for k in 2..=n {
            acc *= k;
        }
        BigRational::from_integer(acc)
    }
}

fn bigint_ln_abs(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().map_or(f64::NAN, |v| v.abs().ln());
    }
    let shift = bits - 64;
    let top: BigInt = x.abs() >> shift;
    top.to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Rounds a rational to the nearest `f64`, handling numerators and
/// denominators beyond the `f64` range.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() {
            return n / d;
        }
    }
    if Zero::is_zero(r) {
        return 0.0;
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    sign * Scalar::ln_abs(r).exp()
}

/// Parses `"p/q"`, `"-3"` or a decimal literal such as `"0.25"` or `"1e-3"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let err = || QesError::ParseRational(text.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| err())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let joined = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(&joined).map_err(|_| err())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// `"p/q"` rendering used in every JSON report.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// Shorthand for building an exact `num/den`.
pub fn q(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact conversion of a finite `f64` (a dyadic rational).
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    BigRational::from_float(x).ok_or_else(|| QesError::ParseRational(x.to_string()))
}

/// Parses a decimal as printed by `f64`'s shortest round-trip formatting, so
/// that `0.1` becomes `1/10` rather than the nearest dyadic rational.
pub fn rational_from_decimal_f64(x: f64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(QesError::ParseRational(x.to_string()));
    }
    parse_rational(&format!("{x:e}"))
}

pub fn is_integer(r: &Rational) -> bool {
    r.is_integer()
}

/// `Some(k)` when `r` is an integer that fits in `i64`.
pub fn as_i64(r: &Rational) -> Option<i64> {
    if r.is_integer() {
        r.numer().to_i64()
    } else {
        None
    }
}

/// Natural-log factorial table `ln(k!)` for `k < len`.
pub fn ln_factorials(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len.max(1));
    out.push(0.0);
    for k in 1..len {
        let prev = out[k - 1];
        out.push(prev + (k as f64).ln());
    }
    out.truncate(len.max(1));
    out
}

/// Serde adapter: rationals are written as `"p/q"` strings and read from
/// strings or JSON numbers (decimals are taken at face value, so `0.1` is
/// `1/10`).
pub mod rational_serde {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    use super::{format_rational, rational_from_json, Rational};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        rational_from_json(&v).map_err(D::Error::custom)
    }
}

/// Reads a rational from a JSON string (`"p/q"`, integer or decimal) or
/// number.
pub fn rational_from_json(v: &serde_json::Value) -> Result<Rational> {
    match v {
        serde_json::Value::String(s) => parse_rational(s),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigRational::from_integer(BigInt::from(i)))
            } else {
                parse_rational(&n.to_string())
            }
        }
        other => Err(QesError::ParseRational(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_integer_and_decimal() {
        assert_eq!(parse_rational("3/4").unwrap(), q(3, 4));
        assert_eq!(parse_rational("-6/8").unwrap(), q(-3, 4));
        assert_eq!(parse_rational("7").unwrap(), q(7, 1));
        assert_eq!(parse_rational("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_rational("-1.5e-1").unwrap(), q(-3, 20));
        assert_eq!(parse_rational("2E2").unwrap(), q(200, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn decimal_float_roundtrip_is_exact() {
        assert_eq!(rational_from_decimal_f64(0.1).unwrap(), q(1, 10));
        assert_eq!(rational_from_decimal_f64(-0.3).unwrap(), q(-3, 10));
    }

    #[test]
    fn huge_rationals_convert_through_logs() {
        let mut big = BigInt::one();
        for k in 2..400u32 {
            big *= k;
        }
        let r = BigRational::new(BigInt::from(3), big.clone());
        let expected = 3.0f64.ln() - ln_factorials(400)[399];
        assert!((Scalar::ln_abs(&r) - expected).abs() < 1e-9);
        assert_eq!(rational_to_f64(&r), 0.0);
        let ratio = BigRational::new(big.clone() * 5, big);
        assert_eq!(rational_to_f64(&ratio), 5.0);
    }

    #[test]
    fn ladder_weights_differ_by_backend() {
        assert_eq!(<f64 as Scalar>::lowering(2), 2f64.sqrt());
        assert_eq!(<Rational as Scalar>::lowering(2), q(2, 1));
        assert_eq!(<Rational as Scalar>::metric(5), q(120, 1));
    }
}
