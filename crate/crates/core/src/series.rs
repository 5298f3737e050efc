//! Truncated Laurent/power series `sum_k a_k z^k` for Bargmann-space
//! functions.

use crate::scalar::Scalar;

/// Coefficients `coeffs[i]` of `z^(low + i)`; the series is known exactly
/// up to `max_power()`.
#[derive(Clone, Debug, PartialEq)]
pub struct BargmannSeries<S> {
    low: i64,
    coeffs: Vec<S>,
}

impl<S: Scalar> BargmannSeries<S> {
    pub fn new(low: i64, coeffs: Vec<S>) -> Self {
        Self { low, coeffs }
    }

    /// Power series `sum_{k<len} a_k z^k` from a coefficient slice.
    pub fn from_coeffs(coeffs: Vec<S>) -> Self {
        Self::new(0, coeffs)
    }

    pub fn monomial(power: i64, max_power: i64) -> Self {
        let len = (max_power - power + 1).max(0) as usize;
        let mut coeffs = vec![S::zero(); len];
        if len > 0 {
            coeffs[0] = S::one();
        }
        Self::new(power, coeffs)
    }

    pub fn low(&self) -> i64 {
        self.low
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest power whose coefficient is known.
    pub fn max_power(&self) -> i64 {
        self.low + self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, power: i64) -> S {
        let i = power - self.low;
        if i < 0 || i >= self.coeffs.len() as i64 {
            S::zero()
        } else {
            self.coeffs[i as usize].clone()
        }
    }

    /// Smallest power with a nonzero coefficient.
    pub fn leading_power(&self) -> Option<i64> {
        self.coeffs.iter().position(|c| !c.is_zero()).map(|i| self.low + i as i64)
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self::new(self.low + k, self.coeffs.clone())
    }

    /// Restriction to powers `<= max_power`.
    pub fn truncate(&self, max_power: i64) -> Self {
        let keep = (max_power - self.low + 1).clamp(0, self.coeffs.len() as i64) as usize;
        Self::new(self.low, self.coeffs[..keep].to_vec())
    }

    /// Coefficients of `z^0 ... z^max_power` (missing entries are zero).
    pub fn power_coeffs(&self, max_power: i64) -> Vec<S> {
        (0..=max_power).map(|p| self.coeff(p)).collect()
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.clone() * S::from_i64(self.low + i as i64))
            .collect();
        Self::new(self.low - 1, coeffs)
    }

    pub fn scale(&self, factor: &S) -> Self {
        Self::new(self.low, self.coeffs.iter().map(|c| c.clone() * factor.clone()).collect())
    }

    /// Sum; the result is known up to the smaller of the two `max_power`s.
    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, S::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -S::one())
    }

    /// `self + factor * other`.
    pub fn combine(&self, other: &Self, factor: S) -> Self {
        let low = self.low.min(other.low);
        let high = self.max_power().min(other.max_power());
        let coeffs = (low..=high).map(|p| self.coeff(p) + factor.clone() * other.coeff(p)).collect();
        Self::new(low, coeffs)
    }

    /// Cauchy product, known up to `min(low_a + max_b, low_b + max_a)`.
    pub fn mul(&self, other: &Self) -> Self {
        let low = self.low + other.low;
        let high = (self.low + other.max_power()).min(other.low + self.max_power());
        let len = (high - low + 1).max(0) as usize;
        let mut coeffs = vec![S::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len.saturating_sub(i)) {
                if !b.is_zero() {
                    coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
                }
            }
        }
        Self::new(low, coeffs)
    }

    pub fn max_abs(&self) -> S {
        S::max_abs(&self.coeffs)
    }

    /// All known coefficients vanish.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    pub fn to_f64(&self) -> BargmannSeries<f64> {
        BargmannSeries::new(self.low, self.coeffs.iter().map(S::to_f64).collect())
    }
}

/// Differential-operator realisation on series: `a -> d/dz`, `a+ -> z`.
pub mod ops {
    use super::BargmannSeries;
    use crate::scalar::Scalar;

    /// `K+ = z^2/2`.
    pub fn k_plus<S: Scalar>(f: &BargmannSeries<S>) -> BargmannSeries<S> {
        f.shift(2).scale(&S::half())
    }

    /// `K- = (1/2) d^2/dz^2`.
    pub fn k_minus<S: Scalar>(f: &BargmannSeries<S>) -> BargmannSeries<S> {
        f.derivative().derivative().scale(&S::half())
    }

    /// `K0 = (1/2)(z d/dz + 1/2)`.
    pub fn k_zero<S: Scalar>(f: &BargmannSeries<S>) -> BargmannSeries<S> {
        let zd = f.derivative().shift(1);
        zd.combine(f, S::half()).scale(&S::half())
    }
}
