//! The algebraized part of the spectrum: eigenvalues of the finite block of
//! `H` on the invariant subspace, cross-checked against truncated Fock
//! diagonalization.

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{fock_basis, level_vectors, solve_uv, SubspaceParams};
use crate::cutoff::{cutoff_residuals, BlockAction};
use crate::error::{QesError, Result};
use crate::fock::bargmann_to_fock;
use crate::model::{assemble_fock, hermitian_check, HamiltonianCoeffs};
use crate::poly;
use crate::scalar::{Rational, Scalar};

/// Extra Fock rows generated beyond the reported truncation so that
/// `H` (which shifts occupation by at most 4) acts exactly on the first `M`.
pub const FOCK_PAD: usize = 8;

/// Relative singular-value threshold for the numerical rank of a basis.
pub const RANK_TOL: f64 = 1e-10;

/// Relative singular-value threshold for the span used to assemble
/// eigenvectors.
pub const EIGEN_SPAN_TOL: f64 = 1e-14;

/// Below this a gap counts as converged when checking monotone decrease.
pub const GAP_FLOOR: f64 = 1e-9;

/// Default Fock truncations for cross-checks.
pub const DEFAULT_FOCK_DIMS: [usize; 3] = [100, 200, 400];

/// Matrix of `H` on the subspace in the level-major basis
/// `(level, component)`. Column `(n, i)` holds the image of basis vector
/// `(n, i)`. Refuses when any cut-off condition is violated.
pub fn block_matrix<S: Scalar>(h: &HamiltonianCoeffs, p: &SubspaceParams) -> Result<Vec<Vec<S>>> {
    let report = cutoff_residuals::<Rational>(h, p);
    if !report.satisfied() {
        return Err(QesError::CutoffViolated(report.max_residual()));
    }
    let action = BlockAction::<S>::new(h, p);
    let d = action.block_dim();
    let levels = p.n as i64 + 1;
    let size = d * levels as usize;
    let mut out = vec![vec![S::zero(); size]; size];
    for n in 0..levels {
        for (shift, b) in action.blocks(n) {
            let target = n + shift;
            if target < 0 || target >= levels {
                continue;
            }
            for i in 0..d {
                for l in 0..d {
                    out[target as usize * d + l][n as usize * d + i] = b.get(i, l).clone();
                }
            }
        }
    }
    Ok(out)
}

pub fn to_dmatrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

/// Eigenvalues sorted by real part, then imaginary part.
pub fn qes_eigenvalues(block: &DMatrix<f64>) -> Vec<Complex<f64>> {
    if block.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<Complex<f64>> = block.complex_eigenvalues().iter().copied().collect();
    sort_complex(&mut ev);
    ev
}

/// Eigenvalues of an exact block from its characteristic polynomial. Each
/// root is refined against exactly evaluated polynomials, so nearly
/// defective blocks keep full `f64` accuracy.
pub fn exact_eigenvalues(block: &[Vec<Rational>]) -> Vec<Complex<f64>> {
    let mut ev = poly::eigenvalues(block);
    sort_complex(&mut ev);
    ev
}

fn sort_complex(ev: &mut [Complex<f64>]) {
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Number of Taylor coefficients compared when looking for linear
/// relations among basis functions.
pub fn relation_terms(n: usize) -> usize {
    4 * n + 48
}

/// Linear relations among the basis functions (level-major order), found
/// exactly on their first [`relation_terms`] Taylor coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisRelations {
    /// Indices of a maximal independent subset, in basis order.
    pub pivots: Vec<usize>,
    /// `(j, c)` with `f_j = sum_k c[k] f_(pivots[k])` for every non-pivot `j`.
    pub dependent: Vec<(usize, Vec<Rational>)>,
}

impl BasisRelations {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

pub fn basis_relations(p: &SubspaceParams) -> Result<BasisRelations> {
    let (u, v) = solve_uv::<Rational>(p, relation_terms(p.n))?;
    let funcs: Vec<_> = level_vectors(p, &u, &v).into_iter().flatten().collect();
    let top = funcs.iter().map(|f| f.max_power()).min().unwrap_or(0).max(0);
    let columns: Vec<Vec<Rational>> = funcs.iter().map(|f| (0..=top).map(|k| f.coeff(k)).collect()).collect();
    let size = columns.len();
    // Echelon rows: (pivot position, reduced vector, combination of pivot columns).
    let mut echelon: Vec<(usize, Vec<Rational>, Vec<Rational>)> = Vec::new();
    let mut pivots = Vec::new();
    let mut dependent: Vec<(usize, Vec<Rational>)> = Vec::new();
    for (j, col) in columns.iter().enumerate() {
        let mut r = col.clone();
        let mut comb = vec![<Rational as Scalar>::zero(); size];
        comb[j] = <Rational as Scalar>::one();
        for (pos, vec, bc) in &echelon {
            if Scalar::is_zero(&r[*pos]) {
                continue;
            }
            let f = &r[*pos] / &vec[*pos];
            for (x, y) in r.iter_mut().zip(vec) {
                *x -= &f * y;
            }
            for (x, y) in comb.iter_mut().zip(bc) {
                *x -= &f * y;
            }
        }
        match r.iter().position(|x| !Scalar::is_zero(x)) {
            Some(pos) => {
                pivots.push(j);
                echelon.push((pos, r, comb));
            }
            None => {
                let c = pivots.iter().map(|&k| -comb[k].clone()).collect();
                dependent.push((j, c));
            }
        }
    }
    let rank = pivots.len();
    for (_, c) in &mut dependent {
        c.resize(rank, <Rational as Scalar>::zero());
    }
    Ok(BasisRelations { pivots, dependent })
}

/// Matrix of `H` on the span of the independent basis functions: the block
/// with every dependent function rewritten through its relation.
pub fn quotient_block(block: &[Vec<Rational>], rel: &BasisRelations) -> Vec<Vec<Rational>> {
    let r = rel.rank();
    let mut out = vec![vec![<Rational as Scalar>::zero(); r]; r];
    for (a, &pa) in rel.pivots.iter().enumerate() {
        for (b, &pb) in rel.pivots.iter().enumerate() {
            let mut x = block[pa][pb].clone();
            for (j, c) in &rel.dependent {
                x += &block[*j][pb] * &c[a];
            }
            out[a][b] = x;
        }
    }
    out
}

/// Fock amplitudes of every basis function at `rows` truncation, as columns
/// in level-major order.
#[derive(Clone, Debug)]
pub struct FockFrame {
    pub vectors: DMatrix<f64>,
    pub diverging: bool,
}

pub fn fock_frame(p: &SubspaceParams, rows: usize) -> Result<FockFrame> {
    let levels = fock_basis(p, rows)?;
    let cols: Vec<_> = levels.into_iter().flatten().collect();
    let diverging = cols.iter().any(|v| v.diverging() || !v.norm_sq.is_finite());
    let vectors = DMatrix::from_fn(rows, cols.len(), |i, j| cols[j].amps[i]);
    Ok(FockFrame { vectors, diverging })
}

/// Fock amplitudes (rows `0..rows`) of a well-conditioned basis of the
/// span. The basis functions are first combined exactly into reduced
/// echelon form on their leading Taylor coefficients, so nearly parallel
/// functions are separated before rounding to `f64`.
pub fn conditioned_frame(p: &SubspaceParams, rows: usize) -> Result<DMatrix<f64>> {
    let zero = <Rational as Scalar>::zero;
    let (u, v) = solve_uv::<Rational>(p, rows + 4)?;
    let funcs: Vec<_> = level_vectors(p, &u, &v).into_iter().flatten().collect();
    let size = funcs.len();
    let top = (relation_terms(p.n) as i64).min(funcs.iter().map(|f| f.max_power()).min().unwrap_or(0));
    let mut rows_ech: Vec<(usize, Vec<Rational>, Vec<Rational>)> = Vec::new();
    for (j, f) in funcs.iter().enumerate() {
        let mut r: Vec<Rational> = (0..=top).map(|k| f.coeff(k)).collect();
        let mut comb = vec![zero(); size];
        comb[j] = <Rational as Scalar>::one();
        for (pos, vec, bc) in &rows_ech {
            if Scalar::is_zero(&r[*pos]) {
                continue;
            }
            let f = &r[*pos] / &vec[*pos];
            for (x, y) in r.iter_mut().zip(vec) {
                *x -= &f * y;
            }
            for (x, y) in comb.iter_mut().zip(bc) {
                *x -= &f * y;
            }
        }
        if let Some(pos) = r.iter().position(|x| !Scalar::is_zero(x)) {
            // Clear the new pivot from the earlier rows.
            for (_, vec, bc) in rows_ech.iter_mut() {
                if Scalar::is_zero(&vec[pos]) {
                    continue;
                }
                let f = &vec[pos] / &r[pos];
                for (x, y) in vec.iter_mut().zip(&r) {
                    *x -= &f * y;
                }
                for (x, y) in bc.iter_mut().zip(&comb) {
                    *x -= &f * y;
                }
            }
            rows_ech.push((pos, r, comb));
        }
    }
    let cols: Vec<Vec<f64>> = rows_ech
        .iter()
        .map(|(_, _, comb)| {
            let mut g = funcs[0].scale(&zero());
            for (c, f) in comb.iter().zip(&funcs) {
                if !Scalar::is_zero(c) {
                    g = g.combine(f, c.clone());
                }
            }
            bargmann_to_fock(&g, rows).map(|fv| fv.amps)
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i]))
}

/// Orthonormal span of a frame: `q = v_head c`, where `v_head` is the first
/// `m` rows, so that `v c` extends `q` to every row of the frame.
struct Span {
    q: DMatrix<f64>,
    c: DMatrix<f64>,
}

fn span(v: &DMatrix<f64>, m: usize, tol: f64) -> Span {
    let head = v.rows(0, m).into_owned();
    let norms: Vec<f64> = head.column_iter().map(|c| c.norm()).collect();
    let scale = DMatrix::from_fn(norms.len(), norms.len(), |i, j| {
        if i == j && norms[i] > 0.0 {
            1.0 / norms[i]
        } else {
            0.0
        }
    });
    let svd = (&head * &scale).svd(true, true);
    let (u, vt) = (svd.u.expect("requested U"), svd.v_t.expect("requested V^T"));
    let smax = svd.singular_values.max();
    let keep: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&k| svd.singular_values[k] > tol * smax).collect();
    let q = DMatrix::from_fn(m, keep.len(), |i, j| u[(i, keep[j])]);
    let w = DMatrix::from_fn(norms.len(), keep.len(), |i, j| vt[(keep[j], i)] / svd.singular_values[keep[j]]);
    Span { q, c: scale * w }
}

/// Eigenvalues of `H` restricted to the subspace.
#[derive(Clone, Debug)]
pub struct QesSpectrum {
    pub exact_block: Vec<Vec<Rational>>,
    pub block: DMatrix<f64>,
    pub relations: BasisRelations,
    /// The block on the independent functions (equal to `exact_block` when
    /// the basis is independent).
    pub reduced_block: Vec<Vec<Rational>>,
    pub eigenvalues: Vec<Complex<f64>>,
}

impl QesSpectrum {
    pub fn rank(&self) -> usize {
        self.relations.rank()
    }

    pub fn reduced(&self) -> bool {
        !self.relations.dependent.is_empty()
    }

    pub fn max_imag(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

/// Block eigenvalues. On a dependent basis the block is first reduced to the
/// independent functions, which drops the spurious eigenvalues carried by
/// the relations.
pub fn qes_spectrum(h: &HamiltonianCoeffs, p: &SubspaceParams) -> Result<QesSpectrum> {
    let exact_block = block_matrix::<Rational>(h, p)?;
    let block = to_dmatrix(
        &exact_block.iter().map(|r| r.iter().map(Scalar::to_f64).collect::<Vec<_>>()).collect::<Vec<_>>(),
    );
    let relations = basis_relations(p)?;
    let reduced_block = if relations.dependent.is_empty() {
        exact_block.clone()
    } else {
        quotient_block(&exact_block, &relations)
    };
    let eigenvalues = exact_eigenvalues(&reduced_block);
    Ok(QesSpectrum { exact_block, block, relations, reduced_block, eigenvalues })
}

/// `H psi` on the first `m` Fock rows for every column of `v` (given at
/// `m + FOCK_PAD` rows).
fn apply_h(h: &HamiltonianCoeffs, v: &DMatrix<f64>, m: usize) -> Result<DMatrix<f64>> {
    let op = assemble_fock::<f64>(h, v.nrows())?;
    let mut out = DMatrix::zeros(m, v.ncols());
    for j in 0..v.ncols() {
        let col: Vec<f64> = v.column(j).iter().copied().collect();
        let hv = op.apply(&col);
        for i in 0..m {
            out[(i, j)] = hv[i];
        }
    }
    Ok(out)
}

/// `max_f ||(1 - P) H f|| / ||H f||` over basis vectors `f`, with `P` the
/// orthogonal projector onto the span of the basis at truncation `m`.
pub fn closure_residual(h: &HamiltonianCoeffs, p: &SubspaceParams, m: usize) -> Result<f64> {
    let frame = fock_frame(p, m + FOCK_PAD)?;
    if frame.diverging {
        return Err(QesError::NormDivergence { m });
    }
    let hv = apply_h(h, &frame.vectors, m)?;
    let q = span(&frame.vectors, m, RANK_TOL).q;
    let proj = &q * (q.transpose() * &hv);
    let mut worst: f64 = 0.0;
    for j in 0..hv.ncols() {
        let total = hv.column(j).norm();
        if total == 0.0 {
            continue;
        }
        let leak = (hv.column(j) - proj.column(j)).norm();
        worst = worst.max(leak / total);
    }
    Ok(worst)
}

/// Eigenvector of one block eigenvalue in Fock space.
#[derive(Clone, Debug)]
pub struct FockEigenvector {
    pub eigenvalue: Complex<f64>,
    /// Unit-norm amplitudes on the first `m` Fock states.
    pub amplitudes: Vec<Complex<f64>>,
    /// `||H psi - lambda psi|| / ||psi||`.
    pub residual: f64,
}

/// For every block eigenvalue, the unit vector `psi` in the span (at
/// truncation `m`) minimizing `||H psi - lambda psi||`, and that minimum.
pub fn fock_eigenvectors(
    h: &HamiltonianCoeffs,
    p: &SubspaceParams,
    spec: &QesSpectrum,
    m: usize,
) -> Result<Vec<FockEigenvector>> {
    if fock_frame(p, m + FOCK_PAD)?.diverging {
        return Err(QesError::NormDivergence { m });
    }
    let frame = conditioned_frame(p, m + FOCK_PAD)?;
    let sp = span(&frame, m, EIGEN_SPAN_TOL);
    let hq = apply_h(h, &(&frame * &sp.c), m)?;
    let cplx = |a: &DMatrix<f64>| a.map(|x| Complex::new(x, 0.0));
    let (q, hq) = (cplx(&sp.q), cplx(&hq));
    Ok(spec
        .eigenvalues
        .iter()
        .map(|&lambda| {
            let a = &hq - &q * lambda;
            let svd = a.svd(false, true);
            let k = svd.singular_values.argmin().0;
            let y = svd.v_t.expect("requested V^T").row(k).transpose().map(|z| z.conj());
            let psi = &q * y;
            FockEigenvector {
                eigenvalue: lambda,
                amplitudes: psi.iter().copied().collect(),
                residual: svd.singular_values[k],
            }
        })
        .collect())
}

/// Truncated-Fock comparison at one truncation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FockMatch {
    #[serde(rename = "M")]
    pub m: usize,
    /// Relative distance `|lambda - mu| / max(1, |lambda|)` to the nearest
    /// truncated eigenvalue (Hermitian instances only).
    pub gaps: Option<Vec<f64>>,
    pub nearest: Option<Vec<f64>>,
    /// Parity (0 even, 1 odd) of the Fock block holding the nearest value.
    pub parities: Option<Vec<usize>>,
    #[serde(rename = "eigenResiduals")]
    pub eigen_residuals: Vec<f64>,
}

fn parity_spectra(h: &HamiltonianCoeffs, m: usize) -> Result<[Vec<f64>; 2]> {
    let op = assemble_fock::<f64>(h, m)?;
    let solve = |parity: usize| -> Result<Vec<f64>> {
        let block = op.parity_block(parity);
        if block.iter().any(|x| !x.is_finite()) {
            return Err(QesError::Eigen(format!("non-finite Fock matrix at M = {m}")));
        }
        Ok(SymmetricEigen::new(block).eigenvalues.iter().copied().collect())
    };
    Ok([solve(0)?, solve(1)?])
}

/// Compares the block eigenvalues with truncated Fock diagonalizations.
/// Hermitian instances get nearest-eigenvalue gaps; every instance gets
/// eigenvector residuals. Truncations run in parallel.
pub fn fock_crosscheck(
    h: &HamiltonianCoeffs,
    p: &SubspaceParams,
    spec: &QesSpectrum,
    dims: &[usize],
) -> Result<Vec<FockMatch>> {
    let hermitian = hermitian_check(h).hermitian;
    dims.par_iter()
        .map(|&m| {
            let eigen_residuals = fock_eigenvectors(h, p, spec, m)?.into_iter().map(|e| e.residual).collect();
            let (mut gaps, mut nearest, mut parities) = (None, None, None);
            if hermitian {
                let spectra = parity_spectra(h, m)?;
                let mut g = Vec::new();
                let mut nv = Vec::new();
                let mut pv = Vec::new();
                for lambda in &spec.eigenvalues {
                    let mut best = (f64::INFINITY, f64::NAN, 0);
                    for (parity, values) in spectra.iter().enumerate() {
                        for &mu in values {
                            let d = (lambda - Complex::new(mu, 0.0)).norm();
                            if d < best.0 {
                                best = (d, mu, parity);
                            }
                        }
                    }
                    g.push(best.0 / lambda.norm().max(1.0));
                    nv.push(best.1);
                    pv.push(best.2);
                }
                gaps = Some(g);
                nearest = Some(nv);
                parities = Some(pv);
            }
            Ok(FockMatch { m, gaps, nearest, parities, eigen_residuals })
        })
        .collect()
}

/// Whether every gap shrinks along the sequence of truncations (gaps
/// below [`GAP_FLOOR`] count as converged).
pub fn gaps_decreasing(matches: &[FockMatch]) -> bool {
    matches.windows(2).all(|w| match (&w[0].gaps, &w[1].gaps) {
        (Some(a), Some(b)) => a.iter().zip(b).all(|(x, y)| y < x || y.max(*x) <= GAP_FLOOR),
        _ => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    fn s0_1() -> (HamiltonianCoeffs, SubspaceParams) {
        let cat = crate::catalog::Catalog::builtin();
        let free = [("a_0m", q(1, 1)), ("a_00", q(1, 1)), ("a_0", q(0, 1))]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let inst =
            cat.family("S0-1").unwrap().instantiate(1, &free, crate::catalog::Variant::Printed).unwrap();
        (inst.coeffs, inst.params)
    }

    #[test]
    fn first_spin0_block() {
        let (h, p) = s0_1();
        let b = block_matrix::<Rational>(&h, &p).unwrap();
        assert_eq!(b, vec![vec![q(1, 16), q(-1, 1)], vec![q(-1, 2), q(25, 16)]]);
    }

    #[test]
    fn first_spin0_eigenvalues() {
        let (h, p) = s0_1();
        let spec = qes_spectrum(&h, &p).unwrap();
        let r = 17f64.sqrt();
        let want = [(13.0 - 4.0 * r) / 16.0, (13.0 + 4.0 * r) / 16.0];
        for (z, w) in spec.eigenvalues.iter().zip(want) {
            assert!((z.re - w).abs() < 1e-12 && z.im.abs() < 1e-12, "{z} vs {w}");
        }
    }

    #[test]
    fn one_by_one_block() {
        let b = DMatrix::from_element(1, 1, 0.75);
        assert_eq!(qes_eigenvalues(&b), vec![Complex::new(0.75, 0.0)]);
    }

    #[test]
    fn refuses_violated_cutoff() {
        let (h, p) = s0_1();
        let bad = h.perturb(&q(1, 10));
        assert!(matches!(block_matrix::<f64>(&bad, &p), Err(QesError::CutoffViolated(_))));
    }

    #[test]
    fn k0_on_constant_stays_in_span() {
        let h = HamiltonianCoeffs::from_ints([0, 0, 0, 0, 0, 1, 0, 0]);
        let p = SubspaceParams::spin0(q(0, 1), q(0, 1), 0);
        assert_eq!(closure_residual(&h, &p, 40).unwrap(), 0.0);
        let spec = qes_spectrum(&h, &p).unwrap();
        assert_eq!(spec.eigenvalues, vec![Complex::new(0.25, 0.0)]);
    }

    #[test]
    fn sorted_by_real_then_imaginary() {
        let mut v = vec![Complex::new(1.0, 1.0), Complex::new(0.0, 2.0), Complex::new(1.0, -1.0)];
        sort_complex(&mut v);
        assert_eq!(v, vec![Complex::new(0.0, 2.0), Complex::new(1.0, -1.0), Complex::new(1.0, 1.0)]);
    }
}
