//! Action of `K+`, `K-`, `K0` on the subspace basis.
//!
//! With `f_n` the vector of basis functions of level `n`,
//!
//! ```text
//! K+ f_n = C+ f_(n+1)
//! K- f_n = C- f_(n+1) + A-(n) f_n + B-(n) f_(n-1)
//! K0 f_n = C0 f_(n+1) + A0(n) f_n
//! ```
//!
//! Row `i` of a block expresses the image of component `i` in terms of the
//! components of the neighbouring level.

use serde::Serialize;

use crate::basis::{level_vectors, require_admissible, FockComponents, SpinKind, SubspaceParams};
use crate::block::Block;
use crate::error::Result;
use crate::fock::build_generators;
use crate::scalar::{Rational, Scalar};
use crate::series::{ops, BargmannSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Generator {
    #[serde(rename = "K+")]
    Plus,
    #[serde(rename = "K-")]
    Minus,
    #[serde(rename = "K0")]
    Zero,
}

impl Generator {
    pub const ALL: [Generator; 3] = [Generator::Plus, Generator::Minus, Generator::Zero];

    pub fn name(self) -> &'static str {
        match self {
            Generator::Plus => "K+",
            Generator::Minus => "K-",
            Generator::Zero => "K0",
        }
    }
}

/// Closed-form structure blocks for one parameter set.
#[derive(Clone, Debug)]
pub struct StructureMatrices<S> {
    kind: SpinKind,
    alpha: S,
    beta: S,
    gamma: S,
    delta: S,
    rho: S,
    tau: S,
}

impl<S: Scalar> StructureMatrices<S> {
    pub fn new(p: &SubspaceParams) -> Self {
        let c = |r: &Rational| S::from_rational(r);
        Self {
            kind: p.kind,
            alpha: c(&p.alpha),
            beta: c(&p.beta),
            gamma: c(&p.gamma),
            delta: c(&p.delta),
            rho: c(&p.rho),
            tau: c(&p.tau),
        }
    }

    pub fn kind(&self) -> SpinKind {
        self.kind
    }

    pub fn block_dim(&self) -> usize {
        self.kind.block_dim()
    }

    fn i(v: i64) -> S {
        S::from_i64(v)
    }

    fn r(num: i64, den: i64) -> S {
        S::ratio(num, den)
    }

    pub fn c_plus(&self) -> Block<S> {
        Block::diagonal(self.block_dim(), S::half())
    }

    pub fn c_minus(&self) -> Block<S> {
        let (a, g, r, t) = (&self.alpha, &self.gamma, &self.rho, &self.tau);
        let two = Self::i(2);
        match self.kind {
            SpinKind::Spin0 => Block::from_rows(vec![vec![two * r.clone() * r.clone()]]),
            SpinKind::SpinHalf => Block::from_rows(vec![
                vec![two.clone() * r.clone() * r.clone(), S::zero()],
                vec![g.clone() * (t.clone() + r.clone()), two * t.clone() * t.clone()],
            ]),
            SpinKind::Spin1 => {
                let w = r.clone() + t.clone();
                let eight = Self::i(8);
                Block::from_rows(vec![
                    vec![eight.clone() * r.clone() * r.clone(), S::zero(), S::zero()],
                    vec![
                        g.clone() * (w.clone() + two.clone() * r.clone()),
                        two.clone() * w.clone() * w.clone(),
                        a.clone() * (two * t.clone() + w),
                    ],
                    vec![S::zero(), S::zero(), eight * t.clone() * t.clone()],
                ])
            }
        }
    }

    pub fn c_zero(&self) -> Block<S> {
        let (a, g, r, t) = (&self.alpha, &self.gamma, &self.rho, &self.tau);
        let half = S::half();
        match self.kind {
            SpinKind::Spin0 => Block::from_rows(vec![vec![r.clone()]]),
            SpinKind::SpinHalf => {
                Block::from_rows(vec![vec![r.clone(), S::zero()], vec![g.clone() * half, t.clone()]])
            }
            SpinKind::Spin1 => {
                let two = Self::i(2);
                Block::from_rows(vec![
                    vec![two.clone() * r.clone(), S::zero(), S::zero()],
                    vec![g.clone() * half.clone(), r.clone() + t.clone(), a.clone() * half],
                    vec![S::zero(), S::zero(), two * t.clone()],
                ])
            }
        }
    }

    /// Level-dependent exponents `(xi, eta) = (beta + n, delta + n)` of the
    /// spin-1 blocks.
    fn xi_eta(&self, n: i64) -> (S, S) {
        (self.beta.clone() + Self::i(n), self.delta.clone() + Self::i(n))
    }

    pub fn a_minus(&self, n: i64) -> Block<S> {
        let (a, b, g, d, r, t) = (&self.alpha, &self.beta, &self.gamma, &self.delta, &self.rho, &self.tau);
        let ag = a.clone() * g.clone();
        let nn = Self::i(n);
        match self.kind {
            SpinKind::Spin0 => Block::from_rows(vec![vec![
                (Self::i(2) * b.clone() + Self::i(4) * nn + S::one()) * r.clone(),
            ]]),
            SpinKind::SpinHalf => {
                let h = S::half();
                Block::from_rows(vec![
                    vec![
                        h.clone()
                            * (Self::i(4) * b.clone() * r.clone()
                                + Self::i(8) * nn.clone() * r.clone()
                                + Self::i(2) * r.clone()
                                + ag.clone()),
                        a.clone() * (t.clone() + r.clone()),
                    ],
                    vec![
                        h.clone()
                            * g.clone()
                            * (b.clone() + d.clone() + Self::i(2) + Self::i(4) * nn.clone()),
                        h * (Self::i(4) * d.clone() * t.clone()
                            + Self::i(8) * nn * t.clone()
                            + Self::i(6) * t.clone()
                            + ag),
                    ],
                ])
            }
            SpinKind::Spin1 => {
                let (xi, eta) = self.xi_eta(n);
                let w = r.clone() + t.clone();
                let two = Self::i(2);
                let three = Self::i(3);
                let four = Self::i(4);
                let half = S::half();
                Block::from_rows(vec![
                    vec![
                        two.clone() * r.clone() * (four.clone() * xi.clone() + S::one()) + ag.clone(),
                        two.clone() * a.clone() * (w.clone() + two.clone() * r.clone()),
                        a.clone() * a.clone(),
                    ],
                    vec![
                        half.clone() * g.clone() * (two.clone() + three.clone() * xi.clone() + eta.clone()),
                        w.clone() * (two.clone() * xi.clone() + two.clone() * eta.clone() + three.clone())
                            + two.clone() * ag.clone(),
                        half * a.clone() * (two.clone() + xi.clone() + three * eta.clone()),
                    ],
                    vec![
                        g.clone() * g.clone(),
                        two.clone() * g.clone() * (w + two.clone() * t.clone()),
                        two * t.clone() * (S::one() + four * eta) + ag,
                    ],
                ])
            }
        }
    }

    pub fn a_zero(&self, n: i64) -> Block<S> {
        let (a, b, g, d) = (&self.alpha, &self.beta, &self.gamma, &self.delta);
        let nn = Self::i(n);
        let quarter = Self::r(1, 4);
        match self.kind {
            SpinKind::Spin0 => {
                Block::from_rows(vec![vec![(Self::i(2) * b.clone() + Self::i(4) * nn + S::one()) * quarter]])
            }
            SpinKind::SpinHalf => Block::from_rows(vec![
                vec![
                    quarter.clone() * (Self::i(2) * b.clone() + Self::i(4) * nn.clone() + S::one()),
                    S::half() * a.clone(),
                ],
                vec![S::zero(), quarter * (Self::i(2) * d.clone() + Self::i(4) * nn + Self::i(3))],
            ]),
            SpinKind::Spin1 => {
                let (xi, eta) = self.xi_eta(n);
                let two = Self::i(2);
                Block::from_rows(vec![
                    vec![xi.clone() + quarter.clone(), a.clone(), S::zero()],
                    vec![
                        S::zero(),
                        (two.clone() * xi + two * eta.clone() + Self::i(3)) * quarter.clone(),
                        S::zero(),
                    ],
                    vec![S::zero(), g.clone(), eta + quarter],
                ])
            }
        }
    }

    pub fn b_minus(&self, n: i64) -> Block<S> {
        let (a, b, g, d) = (&self.alpha, &self.beta, &self.gamma, &self.delta);
        let nn = Self::i(n);
        let two = Self::i(2);
        let half = S::half();
        match self.kind {
            SpinKind::Spin0 => {
                let x = b.clone() + two * nn;
                Block::from_rows(vec![vec![half * x.clone() * (x - S::one())]])
            }
            SpinKind::SpinHalf => {
                let x = b.clone() + two.clone() * nn.clone();
                let y = d.clone() + two * nn.clone();
                Block::from_rows(vec![
                    vec![
                        half.clone() * x.clone() * (x - S::one()),
                        half.clone() * a.clone() * (b.clone() + d.clone() + Self::i(4) * nn),
                    ],
                    vec![S::zero(), half * (y.clone() + S::one()) * y],
                ])
            }
            SpinKind::Spin1 => {
                let (xi, eta) = self.xi_eta(n);
                let three = Self::i(3);
                Block::from_rows(vec![
                    vec![
                        xi.clone() * (two.clone() * xi.clone() - S::one()),
                        a.clone() * (three.clone() * xi.clone() + eta.clone()),
                        S::zero(),
                    ],
                    vec![
                        S::zero(),
                        half * (eta.clone() + xi.clone() + S::one()) * (eta.clone() + xi.clone()),
                        S::zero(),
                    ],
                    vec![
                        S::zero(),
                        g.clone() * (three * eta.clone() + xi),
                        eta.clone() * (two * eta - S::one()),
                    ],
                ])
            }
        }
    }

    /// `(level shift, block)` pairs of one generator acting on level `n`.
    pub fn action(&self, op: Generator, n: i64) -> Vec<(i64, Block<S>)> {
        match op {
            Generator::Plus => vec![(1, self.c_plus())],
            Generator::Minus => {
                vec![(-1, self.b_minus(n)), (0, self.a_minus(n)), (1, self.c_minus())]
            }
            Generator::Zero => vec![(0, self.a_zero(n)), (1, self.c_zero())],
        }
    }
}

/// Largest relative deviation between the direct action of each generator
/// and the structure-matrix prediction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    pub kind: SpinKind,
    pub truncation: usize,
    pub k_plus: f64,
    pub k_minus: f64,
    pub k_zero: f64,
}

impl StructureReport {
    pub fn max(&self) -> f64 {
        self.k_plus.max(self.k_minus).max(self.k_zero)
    }
}

/// Fock-space oracle: applies the truncated `K` matrices to the Fock
/// amplitudes of every basis function and compares with the claimed
/// combination on amplitudes `<= m/2`.
pub fn verify_structure(p: &SubspaceParams, m: usize) -> Result<StructureReport> {
    require_admissible(p)?;
    let comps = FockComponents::new(p, m + 2)?;
    let gens = build_generators::<f64>(m)?;
    let sm = StructureMatrices::<f64>::new(p);
    let window = m / 2 + 1;
    let mut worst = [0.0f64; 3];
    for n in 0..=p.n as i64 {
        let level = comps.level(n, m);
        for (slot, op) in Generator::ALL.iter().enumerate() {
            let matrix = match op {
                Generator::Plus => &gens.k_plus,
                Generator::Minus => &gens.k_minus,
                Generator::Zero => &gens.k0,
            };
            let action = sm.action(*op, n);
            let shifted: Vec<(Vec<Vec<f64>>, &Block<f64>)> =
                action.iter().map(|(s, b)| (comps.level(n + s, m), b)).collect();
            for (i, f) in level.iter().enumerate() {
                let direct = matrix.apply(f);
                let mut claimed = vec![0.0; m];
                for (target, block) in &shifted {
                    for (j, g) in target.iter().enumerate() {
                        let c = *block.get(i, j);
                        if c != 0.0 {
                            for (x, y) in claimed.iter_mut().zip(g) {
                                *x += c * y;
                            }
                        }
                    }
                }
                let scale =
                    direct[..window].iter().chain(&claimed[..window]).fold(0.0f64, |a, x| a.max(x.abs()));
                let diff = direct[..window]
                    .iter()
                    .zip(&claimed[..window])
                    .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
                let rel = if scale > 0.0 { diff / scale } else { diff };
                worst[slot] = worst[slot].max(rel);
            }
        }
    }
    Ok(StructureReport { kind: p.kind, truncation: m, k_plus: worst[0], k_minus: worst[1], k_zero: worst[2] })
}

/// Exact check on Laurent series: the differential-operator action of each
/// generator minus the structure prediction, through the orders known
/// exactly. Negative powers (level `-1`) are kept, so cancellations that the
/// Fock oracle cannot see are checked too.
pub fn verify_structure_series(p: &SubspaceParams, len: usize) -> Result<Rational> {
    let (u, v) = crate::basis::solve_uv::<Rational>(p, len)?;
    let extended = SubspaceParams { n: p.n + 1, ..p.clone() };
    let levels = level_vectors(&extended, &u, &v);
    let below: Vec<BargmannSeries<Rational>> = level_vectors(&extended.clone().with_n(0), &u, &v)
        .remove(0)
        .into_iter()
        .map(|f| f.shift(-2))
        .collect();
    let level = |n: i64| -> &Vec<BargmannSeries<Rational>> {
        if n < 0 {
            &below
        } else {
            &levels[n as usize]
        }
    };
    let sm = StructureMatrices::<Rational>::new(p);
    let mut worst = <Rational as Scalar>::zero();
    for n in 0..=p.n as i64 {
        for op in Generator::ALL {
            for (i, f) in level(n).iter().enumerate() {
                let mut lhs = match op {
                    Generator::Plus => ops::k_plus(f),
                    Generator::Minus => ops::k_minus(f),
                    Generator::Zero => ops::k_zero(f),
                };
                for (s, block) in sm.action(op, n) {
                    for (j, g) in level(n + s).iter().enumerate() {
                        lhs = lhs.combine(g, -block.get(i, j).clone());
                    }
                }
                let r = lhs.max_abs();
                if r > worst {
                    worst = r;
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    #[test]
    fn spin0_entries() {
        let p = SubspaceParams::spin0(q(0, 1), q(0, 1), 2);
        let s = StructureMatrices::<Rational>::new(&p);
        assert_eq!(*s.a_zero(0).get(0, 0), q(1, 4));
        // K- z^2 = 1: B-(1) = 1
        assert_eq!(*s.b_minus(1).get(0, 0), q(1, 1));
    }

    #[test]
    fn spin_half_entries_and_shapes() {
        let p = SubspaceParams::spin_half(q(2, 1), q(0, 1), q(1, 3), q(-1, 1), q(0, 1), q(0, 1), 1);
        let s = StructureMatrices::<Rational>::new(&p);
        assert!(s.c_minus().is_zero());
        assert_eq!(format!("{:?}", s.a_zero(0)), "[[1/4, 1], [0, 1/4]]");
        for n in 0..4 {
            assert!(s.a_zero(n).is_upper_triangular());
            assert!(s.b_minus(n).is_upper_triangular());
        }
        assert!(s.c_zero().is_lower_triangular());
        assert!(s.c_minus().is_lower_triangular());
    }

    #[test]
    fn spin_half_reduces_to_spin0() {
        let half = SubspaceParams::spin_half(q(0, 1), q(2, 1), q(0, 1), q(1, 1), q(1, 5), q(1, 7), 2);
        let zero = SubspaceParams::spin0(q(2, 1), q(1, 5), 2);
        let (h, z) = (StructureMatrices::<Rational>::new(&half), StructureMatrices::<Rational>::new(&zero));
        for n in 0..3 {
            for op in Generator::ALL {
                for ((s1, b1), (s2, b2)) in h.action(op, n).iter().zip(z.action(op, n)) {
                    assert_eq!(*s1, s2);
                    assert_eq!(b1.get(0, 0), b2.get(0, 0));
                }
            }
        }
    }

    #[test]
    fn series_oracle_is_exact() {
        let p = SubspaceParams::spin_half(q(1, 3), q(1, 1), q(-1, 4), q(-1, 1), q(1, 5), q(-1, 10), 2);
        assert_eq!(verify_structure_series(&p, 40).unwrap(), q(0, 1));
        let s1 = SubspaceParams::spin_half(q(1, 3), q(0, 1), q(1, 4), q(0, 1), q(1, 5), q(1, 10), 1)
            .with_kind(SpinKind::Spin1);
        assert_eq!(verify_structure_series(&s1, 40).unwrap(), q(0, 1));
    }
}
