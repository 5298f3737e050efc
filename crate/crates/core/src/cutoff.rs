//! Block action of `H` on the subspace and the cut-off conditions.
//!
//! Composing the generator actions gives the pentadiagonal form
//!
//! ```text
//! H f_n = D2 f_(n+2) + D1(n) f_(n+1) + D~0(n) f_n + D~1(n) f_(n-1) + D~2(n) f_(n-2)
//! ```
//!
//! and `span{f_0..f_N}` is invariant iff `D2 = D1(N) = D~1(0) = D~2(0) = D~2(1) = 0`.

use std::collections::BTreeMap;

use crate::basis::{SpinKind, SubspaceParams};
use crate::block::Block;
use crate::error::{QesError, Result};
use crate::model::HamiltonianCoeffs;
use crate::scalar::{Rational, Scalar};
use crate::structure::{Generator, StructureMatrices};

use Generator::{Minus as M, Plus as P, Zero as Z};

/// Each term of `H` as its coefficient name and the generators in the order
/// they act (rightmost factor first).
pub const TERMS: [(&str, &[Generator]); 8] = [
    ("a_pp", &[P, P]),
    ("a_mm", &[M, M]),
    ("a_00", &[Z, Z]),
    ("a_0m", &[M, Z]),
    ("a_p0", &[Z, P]),
    ("a_0", &[Z]),
    ("a_m", &[M]),
    ("a_p", &[P]),
];

/// `H` restricted to the subspace, as blocks keyed by level shift.
#[derive(Clone, Debug)]
pub struct BlockAction<S> {
    structure: StructureMatrices<S>,
    coeffs: Vec<(S, &'static [Generator])>,
}

impl<S: Scalar> BlockAction<S> {
    pub fn new(h: &HamiltonianCoeffs, p: &SubspaceParams) -> Self {
        let structure = StructureMatrices::new(p);
        let coeffs = TERMS
            .iter()
            .filter_map(|(name, word)| {
                let c = h.get(name).expect("known coefficient name");
                (!num_traits::Zero::is_zero(c)).then(|| (S::from_rational(c), *word))
            })
            .collect();
        Self { structure, coeffs }
    }

    pub fn block_dim(&self) -> usize {
        self.structure.block_dim()
    }

    pub fn structure(&self) -> &StructureMatrices<S> {
        &self.structure
    }

    /// Blocks of a product of generators acting on level `n`. The block of
    /// the generator applied first multiplies from the left.
    pub fn compose(&self, word: &[Generator], n: i64) -> BTreeMap<i64, Block<S>> {
        let dim = self.block_dim();
        let mut cur = BTreeMap::from([(0i64, Block::identity(dim))]);
        for &op in word {
            let mut next: BTreeMap<i64, Block<S>> = BTreeMap::new();
            for (s, acc) in &cur {
                for (s2, b) in self.structure.action(op, n + s) {
                    let prod = acc * &b;
                    let slot = next.entry(s + s2).or_insert_with(|| Block::zeros(dim));
                    *slot = &*slot + &prod;
                }
            }
            cur = next;
        }
        cur
    }

    /// All blocks `D_s(n)`, `s = -2..=2`.
    pub fn blocks(&self, n: i64) -> BTreeMap<i64, Block<S>> {
        let dim = self.block_dim();
        let mut out: BTreeMap<i64, Block<S>> = (-2..=2).map(|s| (s, Block::zeros(dim))).collect();
        for (c, word) in &self.coeffs {
            for (s, b) in self.compose(word, n) {
                let slot = out.get_mut(&s).expect("shift within -2..=2");
                *slot = &*slot + &b.scale(c);
            }
        }
        out
    }

    pub fn block(&self, shift: i64, n: i64) -> Block<S> {
        self.blocks(n).remove(&shift).expect("shift within -2..=2")
    }

    pub fn d2(&self) -> Block<S> {
        self.block(2, 0)
    }
    pub fn d1(&self, n: i64) -> Block<S> {
        self.block(1, n)
    }
    pub fn d0t(&self, n: i64) -> Block<S> {
        self.block(0, n)
    }
    pub fn d1t(&self, n: i64) -> Block<S> {
        self.block(-1, n)
    }
    pub fn d2t(&self, n: i64) -> Block<S> {
        self.block(-2, n)
    }
}

/// The five cut-off blocks for one `(H, subspace)` pair.
#[derive(Clone, Debug, PartialEq)]
pub struct CutoffReport<S: Scalar> {
    pub n: usize,
    pub d2: Block<S>,
    pub d1_n: Block<S>,
    pub d1t_0: Block<S>,
    pub d2t_0: Block<S>,
    pub d2t_1: Block<S>,
    pub exact: bool,
    /// Tolerance used in float mode; zero in exact mode.
    pub threshold: f64,
}

pub const CONDITION_NAMES: [&str; 5] = ["D2", "D1(N)", "D~1(0)", "D~2(0)", "D~2(1)"];

impl<S: Scalar> CutoffReport<S> {
    pub fn blocks(&self) -> [&Block<S>; 5] {
        [&self.d2, &self.d1_n, &self.d1t_0, &self.d2t_0, &self.d2t_1]
    }

    pub fn residuals(&self) -> [f64; 5] {
        self.blocks().map(|b| b.max_abs().to_f64())
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals().into_iter().fold(0.0, f64::max)
    }

    /// Names of the violated conditions.
    pub fn violated(&self) -> Vec<&'static str> {
        CONDITION_NAMES
            .iter()
            .zip(self.blocks())
            .filter(|(_, b)| if self.exact { !b.is_zero() } else { b.max_abs().to_f64() > self.threshold })
            .map(|(name, _)| *name)
            .collect()
    }

    pub fn satisfied(&self) -> bool {
        self.violated().is_empty()
    }
}

/// Float-mode threshold `1e-10 (1 + max |coeff|)`.
pub fn float_threshold(h: &HamiltonianCoeffs) -> f64 {
    1e-10 * (1.0 + h.max_abs().to_f64())
}

pub fn cutoff_residuals<S: Scalar>(h: &HamiltonianCoeffs, p: &SubspaceParams) -> CutoffReport<S> {
    let action = BlockAction::<S>::new(h, p);
    let n = p.n as i64;
    CutoffReport {
        n: p.n,
        d2: action.d2(),
        d1_n: action.d1(n),
        d1t_0: action.d1t(0),
        d2t_0: action.d2t(0),
        d2t_1: action.d2t(1),
        exact: S::EXACT,
        threshold: if S::EXACT { 0.0 } else { float_threshold(h) },
    }
}

/// Residuals of the identity linking the diagonal of `D1(N)` with the
/// combinations `Y` and `Z` that make up its off-diagonal entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ObsCheck<S> {
    /// `d1 - d4 - ((rho - tau) Z + (beta - delta - 1) Y)` with `d1`, `d4`
    /// taken from the composed `D1(N)`.
    pub identity: S,
    /// Same identity with the closed-form `d1`, `d4`.
    pub identity_closed_form: S,
    /// Composed `D1(N)` minus `[[d1, alpha Y], [gamma Z / 2, d4]]`.
    pub d1_block: S,
    /// Composed `D2` minus its closed form.
    pub d2_block: S,
}

/// Closed forms of `Y`, `Z`, `d1`, `d4` and `D2` for a spin-half subspace
/// with `a_mm = 0`.
pub struct ClosedForms<S> {
    pub y: S,
    pub z: S,
    pub d1: S,
    pub d4: S,
    pub d2: Block<S>,
}

pub fn closed_forms<S: Scalar>(h: &HamiltonianCoeffs, p: &SubspaceParams) -> ClosedForms<S> {
    let c = |r: &Rational| S::from_rational(r);
    let (al, be, ga, de, rho, tau) =
        (c(&p.alpha), c(&p.beta), c(&p.gamma), c(&p.delta), c(&p.rho), c(&p.tau));
    let (app, a00, a0m, ap0, a0, am, ap) =
        (c(&h.a_pp), c(&h.a_00), c(&h.a_0m), c(&h.a_p0), c(&h.a_0), c(&h.a_m), c(&h.a_p));
    let n = S::from_i64(p.n as i64);
    let i = |v: i64| S::from_i64(v);
    let r = |a: i64, b: i64| S::ratio(a, b);
    let ag = al.clone() * ga.clone();

    let y = (rho.clone() + tau.clone()) * r(1, 2) * a00.clone()
        + (rho.clone() * rho.clone() + tau.clone() * tau.clone() + rho.clone() * tau.clone()) * a0m.clone()
        + ap0.clone() * r(1, 4);
    let xi = i(12) * n.clone() * (rho.clone() + tau.clone())
        + ag.clone()
        + tau.clone() * (i(4) * de.clone() + i(2) * be.clone() + i(11))
        + rho.clone() * (i(4) * be.clone() + i(2) * de.clone() + i(9));
    let z = i(2) * (tau.clone() + rho.clone()) * am.clone()
        + a0.clone()
        + a0m.clone() * r(1, 2) * xi
        + a00.clone() * r(1, 2) * (be.clone() + de.clone() + i(4) * n.clone() + i(4));
    let d1 = ap.clone() * r(1, 2)
        + i(2) * rho.clone() * rho.clone() * am.clone()
        + rho.clone() * a0.clone()
        + ap0.clone() * r(1, 8) * (i(2) * be.clone() + i(4) * n.clone() + i(1))
        + a0m.clone()
            * r(1, 2)
            * (ag.clone() * (tau.clone() + i(2) * rho.clone())
                + rho.clone() * rho.clone() * (i(7) + i(6) * be.clone() + i(12) * n.clone()))
        + a00.clone() * r(1, 4) * (rho.clone() * (i(4) * be.clone() + i(8) * n.clone() + i(6)) + ag.clone());
    let d4 = ap * r(1, 2)
        + i(2) * tau.clone() * tau.clone() * am
        + tau.clone() * a0
        + ap0.clone() * r(1, 8) * (i(2) * de.clone() + i(4) * n.clone() + i(3))
        + a0m.clone()
            * r(1, 2)
            * (ag.clone() * (rho.clone() + i(2) * tau.clone())
                + tau.clone() * tau.clone() * (i(12) * n.clone() + i(13) + i(6) * de.clone()))
        + a00.clone() * r(1, 4) * (tau.clone() * (i(4) * de + i(8) * n + i(10)) + ag);
    let corner = |w: &S| {
        w.clone() * w.clone() * a00.clone()
            + i(2) * w.clone() * w.clone() * w.clone() * a0m.clone()
            + w.clone() * ap0.clone() * r(1, 2)
            + app.clone() * r(1, 4)
    };
    let d2 = Block::from_rows(vec![vec![corner(&rho), S::zero()], vec![ga * y.clone(), corner(&tau)]]);
    ClosedForms { y, z, d1, d4, d2 }
}

/// Checks the `d1 - d4` identity (spin-half, `a_mm = 0`).
pub fn identity_obs_check<S: Scalar>(h: &HamiltonianCoeffs, p: &SubspaceParams) -> Result<ObsCheck<S>> {
    if p.kind != SpinKind::SpinHalf || !num_traits::Zero::is_zero(&h.a_mm) {
        return Err(QesError::NotApplicable("the d1 - d4 identity"));
    }
    let action = BlockAction::<S>::new(h, p);
    let d1n = action.d1(p.n as i64);
    let cf = closed_forms::<S>(h, p);
    let c = |r: &Rational| S::from_rational(r);
    let rhs = (c(&p.rho) - c(&p.tau)) * cf.z.clone() + (c(&p.beta) - c(&p.delta) - S::one()) * cf.y.clone();
    let identity = d1n.get(0, 0).clone() - d1n.get(1, 1).clone() - rhs.clone();
    let identity_closed_form = cf.d1.clone() - cf.d4.clone() - rhs;
    let expected = Block::from_rows(vec![
        vec![cf.d1.clone(), c(&p.alpha) * cf.y.clone()],
        vec![c(&p.gamma) * cf.z.clone() * S::half(), cf.d4.clone()],
    ]);
    let d1_block = (&d1n - &expected).max_abs();
    let d2_block = (&action.d2() - &cf.d2).max_abs();
    Ok(ObsCheck { identity, identity_closed_form, d1_block, d2_block })
}
