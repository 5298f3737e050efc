//! Dense univariate polynomials over the rationals, used to get block
//! eigenvalues from the exact characteristic polynomial.

use nalgebra::{Complex, DMatrix};
use num_traits::{One, Zero};

use crate::scalar::{rational_from_f64, rational_to_f64, Rational};

/// Coefficients in ascending powers; no trailing zeros.
pub type Poly = Vec<Rational>;

fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

pub fn degree(p: &Poly) -> usize {
    p.len().saturating_sub(1)
}

fn monic(p: Poly) -> Poly {
    let p = trim(p);
    match p.last().cloned() {
        Some(lead) => p.into_iter().map(|c| c / lead.clone()).collect(),
        None => p,
    }
}

pub fn derivative(p: &Poly) -> Poly {
    trim(p.iter().enumerate().skip(1).map(|(k, c)| c * Rational::from_integer((k as i64).into())).collect())
}

fn sub(a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    let zero = Rational::zero();
    trim((0..n).map(|k| a.get(k).unwrap_or(&zero) - b.get(k).unwrap_or(&zero)).collect())
}

/// Quotient and remainder.
pub fn div_rem(a: &Poly, b: &Poly) -> (Poly, Poly) {
    let b = trim(b.clone());
    assert!(!b.is_empty(), "division by the zero polynomial");
    let mut r = trim(a.clone());
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let lead = b.last().expect("nonzero").clone();
    let mut quot = vec![Rational::zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let f = r.last().expect("nonempty").clone() / lead.clone();
        for (k, c) in b.iter().enumerate() {
            r[shift + k] -= &f * c;
        }
        quot[shift] = f;
        r.pop();
        r = trim(r);
    }
    (trim(quot), r)
}

/// Monic greatest common divisor.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    let (mut a, mut b) = (trim(a.clone()), trim(b.clone()));
    while !b.is_empty() {
        let (_, r) = div_rem(&a, &b);
        a = b;
        b = monic(r);
    }
    monic(a)
}

/// Square-free factorization `p = prod_i f_i^i` (Yun); returns `(f_i, i)`
/// for the non-constant factors.
pub fn square_free(p: &Poly) -> Vec<(Poly, usize)> {
    let p = monic(p.clone());
    if degree(&p) == 0 {
        return Vec::new();
    }
    let dp = derivative(&p);
    let a0 = gcd(&p, &dp);
    let mut b = div_rem(&p, &a0).0;
    let c = div_rem(&dp, &a0).0;
    let mut d = sub(&c, &derivative(&b));
    let mut out = Vec::new();
    let mut i = 1;
    while degree(&b) > 0 {
        let a = gcd(&b, &d);
        let nb = div_rem(&b, &a).0;
        let nc = div_rem(&d, &a).0;
        d = sub(&nc, &derivative(&nb));
        b = nb;
        if degree(&a) > 0 {
            out.push((a, i));
        }
        i += 1;
    }
    out
}

/// Monic characteristic polynomial `det(x - A)` (Faddeev-LeVerrier).
pub fn charpoly(a: &[Vec<Rational>]) -> Poly {
    let n = a.len();
    let mut coeffs = vec![Rational::zero(); n + 1];
    coeffs[n] = Rational::one();
    let mut m = vec![vec![Rational::zero(); n]; n];
    for k in 1..=n {
        // M_k = A M_(k-1) + c_(n-k+1) I
        let mut next = vec![vec![Rational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = Rational::zero();
                for l in 0..n {
                    if !a[i][l].is_zero() && !m[l][j].is_zero() {
                        s += &a[i][l] * &m[l][j];
                    }
                }
                next[i][j] = s;
            }
            next[i][i] += &coeffs[n - k + 1];
        }
        let mut trace = Rational::zero();
        for i in 0..n {
            for l in 0..n {
                trace += &a[i][l] * &next[l][i];
            }
        }
        coeffs[n - k] = -trace / Rational::from_integer((k as i64).into());
        m = next;
    }
    coeffs
}

/// `(p(z), p'(z))` evaluated exactly at a point with `f64` parts, returned
/// as `p(z) / p'(z)` rounded to `f64` (`None` when `p'(z) = 0`).
fn newton_ratio(p: &Poly, z: Complex<f64>) -> Option<Complex<f64>> {
    let (zr, zi) = (rational_from_f64(z.re).ok()?, rational_from_f64(z.im).ok()?);
    let (mut pr, mut pi) = (Rational::zero(), Rational::zero());
    let (mut dr, mut di) = (Rational::zero(), Rational::zero());
    for c in p.iter().rev() {
        // d = d z + p ; p = p z + c
        let ndr = &dr * &zr - &di * &zi + &pr;
        let ndi = &dr * &zi + &di * &zr + &pi;
        let npr = &pr * &zr - &pi * &zi + c;
        let npi = &pr * &zi + &pi * &zr;
        (dr, di, pr, pi) = (ndr, ndi, npr, npi);
    }
    if pr.is_zero() && pi.is_zero() {
        return Some(Complex::new(0.0, 0.0));
    }
    let den = &dr * &dr + &di * &di;
    if den.is_zero() {
        return None;
    }
    let re = (&pr * &dr + &pi * &di) / &den;
    let im = (&pi * &dr - &pr * &di) / &den;
    Some(Complex::new(rational_to_f64(&re), rational_to_f64(&im)))
}

/// Roots of a square-free polynomial: companion-matrix estimates refined by
/// Aberth iteration with exactly evaluated Newton corrections.
pub fn roots(p: &Poly) -> Vec<Complex<f64>> {
    let p = monic(p.clone());
    let n = degree(&p);
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![Complex::new(rational_to_f64(&-p[0].clone()), 0.0)];
    }
    let companion = DMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -rational_to_f64(&p[i])
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let mut z: Vec<Complex<f64>> = companion.complex_eigenvalues().iter().copied().collect();
    for _ in 0..100 {
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let Some(ratio) = newton_ratio(&p, z[k]) else { continue };
            let repulsion: Complex<f64> = (0..n)
                .filter(|&j| j != k && z[j] != z[k])
                .map(|j| Complex::new(1.0, 0.0) / (z[k] - z[j]))
                .sum();
            let step = ratio / (Complex::new(1.0, 0.0) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                continue;
            }
            z[k] -= step;
            worst = worst.max(step.norm() / z[k].norm().max(1.0));
        }
        if worst <= 1e-16 {
            break;
        }
    }
    z
}

/// All eigenvalues of an exact square matrix, repeated by algebraic
/// multiplicity.
pub fn eigenvalues(a: &[Vec<Rational>]) -> Vec<Complex<f64>> {
    square_free(&charpoly(a))
        .into_iter()
        .flat_map(|(f, mult)| roots(&f).into_iter().flat_map(move |r| std::iter::repeat_n(r, mult)))
        .collect()
}
