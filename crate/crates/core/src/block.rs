//! Small dense square blocks (1x1, 2x2, 3x3) used for structure matrices and
//! the pentadiagonal block action of the Hamiltonian.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::scalar::{Rational, Scalar};

#[derive(Clone, PartialEq)]
pub struct Block<S> {
    dim: usize,
    data: Vec<S>,
}

impl<S: Scalar> Block<S> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![S::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(dim, S::one())
    }

    pub fn diagonal(dim: usize, value: S) -> Self {
        let mut b = Self::zeros(dim);
        for i in 0..dim {
            b.set(i, i, value.clone());
        }
        b
    }

    /// Builds a block from row vectors. Panics on ragged input.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "block rows must be square");
            data.extend(row);
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: S) {
        self.data[i * self.dim + j] = value;
    }

    pub fn rows(&self) -> Vec<Vec<S>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn scale(&self, factor: &S) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|x| x.clone() * factor.clone()).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(S::is_zero)
    }

    pub fn max_abs(&self) -> S {
        S::max_abs(&self.data)
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.get(i, j).is_zero()))
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.dim).all(|i| (i + 1..self.dim).all(|j| self.get(i, j).is_zero()))
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Block<T> {
        Block { dim: self.dim, data: self.data.iter().map(f).collect() }
    }

    pub fn to_f64(&self) -> Block<f64> {
        self.map(S::to_f64)
    }
}

impl Block<Rational> {
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.data.chunks(self.dim).map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
    }
}

impl<S: Scalar> Add for &Block<S> {
    type Output = Block<S>;
    fn add(self, rhs: &Block<S>) -> Block<S> {
        assert_eq!(self.dim, rhs.dim);
        Block {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }
}

impl<S: Scalar> Sub for &Block<S> {
    type Output = Block<S>;
    fn sub(self, rhs: &Block<S>) -> Block<S> {
        assert_eq!(self.dim, rhs.dim);
        Block {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }
}

impl<S: Scalar> Mul for &Block<S> {
    type Output = Block<S>;
    fn mul(self, rhs: &Block<S>) -> Block<S> {
        assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut out = Block::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = S::zero();
                for k in 0..d {
                    let a = self.get(i, k);
                    let b = rhs.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc + a.clone() * b.clone();
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }
}

impl<S: Scalar> fmt::Debug for Block<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, row) in self.data.chunks(self.dim).enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}
