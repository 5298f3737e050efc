//! Quasi-exactly solvable quartic Bose Hamiltonians.
//!
//! The Hamiltonian
//!
//! ```text
//! H = a_pp K+^2 + a_mm K-^2 + a_00 K0^2 + a_0m K0 K- + a_p0 K+ K0
//!   + a_0 K0 + a_m K- + a_p K+
//! ```
//!
//! is quadratic in the sl(2,R) generators `K0 = (a+a + 1/2)/2`, `K- = a^2/2`,
//! `K+ = a+^2/2`. In the Bargmann representation (`a -> d/dz`, `a+ -> z`) it
//! can leave a finite-dimensional space of functions `z^(2n) u(z)`,
//! `z^(2n+1) v(z)` invariant, so part of its spectrum comes from a finite
//! matrix. This crate builds those subspaces, checks the cut-off conditions
//! in exact rational arithmetic, and cross-checks everything against
//! brute-force diagonalisation in a truncated Fock space.

pub mod basis;
pub mod block;
pub mod catalog;
pub mod cli;
pub mod cutoff;
pub mod error;
pub mod fock;
pub mod model;
pub mod poly;
pub mod scalar;
pub mod series;
pub mod spectrum;
pub mod structure;

pub use error::{QesError, Result};
pub use scalar::{Rational, Scalar};
