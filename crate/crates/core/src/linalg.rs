//! PSD verdicts, spectral norms, and sparse weighted-shift maps.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Relative PSD tolerance: `λ_min ≥ −tol · max(1, ‖M‖)`.
pub const PSD_TOL: f64 = 1e-10;

/// Symmetry tolerance for [`psd_check`] inputs, relative to `max(1, max|M_ij|)`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Target accuracy and iteration cap for [`operator_norm`].
pub const POWER_ITERATION_TOL: f64 = 1e-10;
pub const POWER_ITERATION_MAX: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdVerdict {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    /// Spectral norm (largest |λ|).
    pub norm: f64,
    pub tolerance: f64,
    pub dimension: usize,
}

impl PsdVerdict {
    fn from_spectrum(min: f64, norm: f64, tol: f64, dimension: usize) -> Self {
        PsdVerdict {
            is_psd: min >= -tol * norm.max(1.0),
            min_eigenvalue: min,
            norm,
            tolerance: tol,
            dimension,
        }
    }

    /// Minimum eigenvalue scaled by `max(1, ‖M‖)`; comparable across matrices.
    pub fn scaled_min(&self) -> f64 {
        self.min_eigenvalue / self.norm.max(1.0)
    }
}

fn check_square_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Shape(format!("{}×{} matrix is not square", m.nrows(), m.ncols())));
    }
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::Shape(format!("matrix not symmetric at ({i},{j})")));
            }
        }
    }
    Ok(())
}

fn spectrum_bounds(m: DMatrix<f64>) -> (f64, f64) {
    if m.nrows() == 0 {
        return (0.0, 0.0);
    }
    let sym = (&m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let norm = eig.iter().map(|v| v.abs()).fold(0.0, f64::max);
    (min, norm)
}

/// Dense symmetric eigen-decomposition verdict.
pub fn psd_check(m: &DMatrix<f64>, tol: f64) -> Result<PsdVerdict> {
    check_square_symmetric(m)?;
    let (min, norm) = spectrum_bounds(m.clone());
    Ok(PsdVerdict::from_spectrum(min, norm, tol, m.nrows()))
}

/// Same verdict as [`psd_check`], computed on the irreducible diagonal blocks
/// of `m` (connected components of its sparsity graph). A symmetric matrix is
/// permutation-similar to the direct sum of these blocks, so the spectrum is
/// the union of the block spectra.
pub fn psd_check_blockwise(m: &DMatrix<f64>, tol: f64) -> Result<PsdVerdict> {
    check_square_symmetric(m)?;
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for j in 0..n {
        for i in 0..j {
            if m[(i, j)] != 0.0 || m[(j, i)] != 0.0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let (mut min, mut norm) = (if n == 0 { 0.0 } else { f64::INFINITY }, 0.0f64);
    for members in groups.values() {
        let block = DMatrix::from_fn(members.len(), members.len(), |a, b| m[(members[a], members[b])]);
        let (lo, nm) = spectrum_bounds(block);
        min = min.min(lo);
        norm = norm.max(nm);
    }
    Ok(PsdVerdict::from_spectrum(min, norm, tol, n))
}

/// Something `operator_norm` can iterate with.
pub trait LinearOperator {
    fn ncols(&self) -> usize;
    fn mul(&self, x: &DVector<f64>) -> DVector<f64>;
    fn mul_transpose(&self, y: &DVector<f64>) -> DVector<f64>;
}

impl LinearOperator for DMatrix<f64> {
    fn ncols(&self) -> usize {
        DMatrix::ncols(self)
    }
    fn mul(&self, x: &DVector<f64>) -> DVector<f64> {
        self * x
    }
    fn mul_transpose(&self, y: &DVector<f64>) -> DVector<f64> {
        self.tr_mul(y)
    }
}

/// Diagonal operator stored by its diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagonal(pub Vec<f64>);

impl LinearOperator for Diagonal {
    fn ncols(&self) -> usize {
        self.0.len()
    }
    fn mul(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(x.len(), x.iter().zip(&self.0).map(|(a, d)| a * d))
    }
    fn mul_transpose(&self, y: &DVector<f64>) -> DVector<f64> {
        self.mul(y)
    }
}

/// Largest singular value by power iteration on `AᵀA`.
pub fn operator_norm<A: LinearOperator + ?Sized>(a: &A) -> f64 {
    let n = a.ncols();
    if n == 0 {
        return 0.0;
    }
    // Deterministic start with no zero components.
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i as f64 + 1.0).sqrt() * 1e-3);
    v /= v.norm();
    let mut sigma = 0.0;
    for _ in 0..POWER_ITERATION_MAX {
        let av = a.mul(&v);
        let next = av.norm();
        let u = a.mul_transpose(&av);
        let un = u.norm();
        if un == 0.0 {
            return next;
        }
        v = u / un;
        let done = (next - sigma).abs() <= POWER_ITERATION_TOL * 1e-3 * next;
        sigma = next;
        if done {
            break;
        }
    }
    sigma
}

/// Matrix with at most one nonzero per column, e.g. a (product of) truncated
/// weighted shifts: column `j` maps to `value · e_row`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftMap {
    cols: Vec<Option<(usize, f64)>>,
    /// Inverse: row `r` is hit by column `rows[r]`.
    rows: Vec<Option<usize>>,
}

impl ShiftMap {
    pub fn identity(n: usize) -> Self {
        ShiftMap { cols: (0..n).map(|j| Some((j, 1.0))).collect(), rows: (0..n).map(Some).collect() }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape("shift map must be square".into()));
        }
        let n = m.ncols();
        let mut cols = vec![None; n];
        let mut rows = vec![None; n];
        for j in 0..n {
            for i in 0..n {
                let v = m[(i, j)];
                if v != 0.0 {
                    if cols[j].is_some() || rows[i].is_some() {
                        return Err(Error::Shape(format!(
                            "entry ({i},{j}) breaks the one-nonzero-per-row/column structure"
                        )));
                    }
                    cols[j] = Some((i, v));
                    rows[i] = Some(j);
                }
            }
        }
        Ok(ShiftMap { cols, rows })
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    /// `A e_j`
    pub fn apply(&self, j: usize) -> Option<(usize, f64)> {
        self.cols[j]
    }

    /// `A* e_i`
    pub fn apply_adjoint(&self, i: usize) -> Option<(usize, f64)> {
        self.rows[i].map(|j| (j, self.cols[j].expect("inverse index consistent").1))
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &ShiftMap) -> ShiftMap {
        let n = self.dim();
        let mut cols = vec![None; n];
        let mut rows = vec![None; n];
        for (j, c) in other.cols.iter().enumerate() {
            if let Some((mid, a)) = c {
                if let Some((r, b)) = self.cols[*mid] {
                    if a * b != 0.0 {
                        cols[j] = Some((r, a * b));
                        rows[r] = Some(j);
                    }
                }
            }
        }
        ShiftMap { cols, rows }
    }

    /// Same sparsity pattern, entries replaced by `f(column, row, value)`.
    pub fn map_values(&self, f: impl Fn(usize, usize, f64) -> f64) -> ShiftMap {
        let mut out = self.clone();
        for (j, c) in out.cols.iter_mut().enumerate() {
            if let Some((i, v)) = c {
                *v = f(j, *i, *v);
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (j, c) in self.cols.iter().enumerate() {
            if let Some((i, v)) = c {
                m[(*i, j)] = *v;
            }
        }
        m
    }
}

impl LinearOperator for ShiftMap {
    fn ncols(&self) -> usize {
        self.dim()
    }
    fn mul(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.dim());
        for (j, c) in self.cols.iter().enumerate() {
            if let Some((i, v)) = c {
                y[*i] += v * x[j];
            }
        }
        y
    }
    fn mul_transpose(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut x = DVector::zeros(self.dim());
        for (j, c) in self.cols.iter().enumerate() {
            if let Some((i, v)) = c {
                x[j] += v * y[*i];
            }
        }
        x
    }
}
