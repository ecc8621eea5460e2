//! Finite matrix representations of a weighted-shift pair on `[0, N]²`.

use nalgebra::DMatrix;

use crate::diagram::WeightDiagram;
use crate::error::{Error, Result};
use crate::lattice::LatticePoint;

/// `(T₁, T₂)` compressed to `span{e_k : k1, k2 ≤ N}`, plus the diagonal of `P`.
///
/// `T₁ e_k = α_k e_{k+ε₁}` when `k1 < N` and `0` otherwise (likewise `T₂`).
/// `p_diag` holds the untruncated values `√(α_k² + β_k²)`.
#[derive(Debug, Clone)]
pub struct TruncatedPair {
    pub level: usize,
    pub t1: DMatrix<f64>,
    pub t2: DMatrix<f64>,
    pub p_diag: Vec<f64>,
}

impl TruncatedPair {
    pub fn dim(&self) -> usize {
        (self.level + 1) * (self.level + 1)
    }

    /// Basis index of `e_k`.
    pub fn index(&self, k: LatticePoint) -> usize {
        k.k1 * (self.level + 1) + k.k2
    }

    pub fn point(&self, index: usize) -> LatticePoint {
        LatticePoint::new(index / (self.level + 1), index % (self.level + 1))
    }

    pub fn p_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.p_diag.clone()))
    }

    pub fn t(&self, i: usize) -> &DMatrix<f64> {
        if i == 1 {
            &self.t1
        } else {
            &self.t2
        }
    }
}

pub fn truncate(w: &WeightDiagram, level: usize) -> Result<TruncatedPair> {
    if level < 1 {
        return Err(Error::Window(format!("truncation level {level} must be at least 1")));
    }
    let n = level + 1;
    let mut t1 = DMatrix::zeros(n * n, n * n);
    let mut t2 = DMatrix::zeros(n * n, n * n);
    let mut p_diag = vec![0.0; n * n];
    let idx = |k: LatticePoint| k.k1 * n + k.k2;
    for k in LatticePoint::square(level) {
        let (a, b) = (w.alpha(k), w.beta(k));
        if k.k1 < level {
            t1[(idx(k.right()), idx(k))] = a;
        }
        if k.k2 < level {
            t2[(idx(k.up()), idx(k))] = b;
        }
        p_diag[idx(k)] = a.hypot(b);
    }
    Ok(TruncatedPair { level, t1, t2, p_diag })
}
