//! Hyponormality, joint hyponormality and k-hyponormality tests.
//!
//! Weight-level tests (six-point matrices, Hankel moment matrices) are
//! cross-validated against block commutator matrices built on truncations.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Matrix2};
use serde::Serialize;

use crate::diagram::{WeightDiagram, WEIGHT_TOL};
use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::linalg::{psd_check, psd_check_blockwise, PsdVerdict, ShiftMap, PSD_TOL};
use crate::onevar::OneVarWeights;
use crate::truncation::truncate;

/// `M(k)` for the pair of basis vectors `e_{k+ε₁}`, `e_{k+ε₂}`.
pub fn six_point_matrix(w: &WeightDiagram, k: LatticePoint) -> Matrix2<f64> {
    let a = w.alpha(k);
    let b = w.beta(k);
    let a_right = w.alpha(k.right());
    let a_up = w.alpha(k.up());
    let b_right = w.beta(k.right());
    let b_up = w.beta(k.up());
    let off = a_up * b_right - a * b;
    Matrix2::new(a_right * a_right - a * a, off, off, b_up * b_up - b * b)
}

pub fn six_point_test(w: &WeightDiagram, k: LatticePoint) -> (Matrix2<f64>, PsdVerdict) {
    let m = six_point_matrix(w, k);
    let dense = DMatrix::from_column_slice(2, 2, m.as_slice());
    let verdict = psd_check(&dense, PSD_TOL).expect("2×2 six-point matrix is symmetric");
    (m, verdict)
}

/// Lattice point where a six-point matrix is least positive (or first fails).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub point: LatticePoint,
    pub matrix: [[f64; 2]; 2],
    pub min_eigenvalue: f64,
}

impl Witness {
    fn new(point: LatticePoint, m: &Matrix2<f64>, v: &PsdVerdict) -> Self {
        Witness {
            point,
            matrix: [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]],
            min_eigenvalue: v.min_eigenvalue,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypoReport {
    pub level: usize,
    pub componentwise: (bool, bool),
    pub joint: bool,
    /// k-hyponormality verdicts, when requested.
    pub k_hypo: BTreeMap<usize, bool>,
    /// First failing six-point matrix in scan order.
    pub worst_witness: Option<Witness>,
    /// Six-point matrix with the smallest scaled eigenvalue.
    pub tightest: Witness,
    /// Order-1 block-commutator verdict on the interior of the truncation.
    pub operator_level: PsdVerdict,
}

impl HypoReport {
    /// `joint ⟹ componentwise` and `k ⟹ k − 1`.
    pub fn hierarchy_consistent(&self) -> bool {
        let comp = !self.joint || (self.componentwise.0 && self.componentwise.1);
        let chain = self
            .k_hypo
            .iter()
            .all(|(k, v)| !*v || *k == 1 || self.k_hypo.get(&(k - 1)).is_none_or(|prev| *prev));
        comp && chain
    }
}

/// `(α nondecreasing along rows, β nondecreasing along columns)` on `[0, N]²`.
pub fn componentwise_hyponormal(w: &WeightDiagram, level: usize) -> (bool, bool) {
    let rows = LatticePoint::square(level).all(|k| w.alpha(k) <= w.alpha(k.right()) + WEIGHT_TOL);
    let cols = LatticePoint::square(level).all(|k| w.beta(k) <= w.beta(k.up()) + WEIGHT_TOL);
    (rows, cols)
}

/// Graded-lexicographic exponents `p` with `1 ≤ |p| ≤ k`.
pub fn monomials(k: usize) -> Vec<(usize, usize)> {
    (1..=k).flat_map(|d| (0..=d).rev().map(move |p1| (p1, d - p1))).collect()
}

/// Block matrix with `(p, q)` block `[(T^q)*, T^p]`, compressed to `interior`:
/// entry `((p, i), (q, j)) = ⟨T^p e_j, T^q e_i⟩ − ⟨(T^q)* e_j, (T^p)* e_i⟩`.
fn commutator_matrix(powers: &[ShiftMap], interior: &[usize]) -> DMatrix<f64> {
    let b = interior.len();
    let mut m = DMatrix::zeros(powers.len() * b, powers.len() * b);
    for (pi, tp) in powers.iter().enumerate() {
        for (qi, tq) in powers.iter().enumerate() {
            for (ii, &i) in interior.iter().enumerate() {
                let tq_i = tq.apply(i);
                let tp_adj_i = tp.apply_adjoint(i);
                for (jj, &j) in interior.iter().enumerate() {
                    let mut v = 0.0;
                    if let (Some((r1, x1)), Some((r2, x2))) = (tp.apply(j), tq_i) {
                        if r1 == r2 {
                            v += x1 * x2;
                        }
                    }
                    if let (Some((r1, x1)), Some((r2, x2))) = (tq.apply_adjoint(j), tp_adj_i) {
                        if r1 == r2 {
                            v -= x1 * x2;
                        }
                    }
                    m[(pi * b + ii, qi * b + jj)] = v;
                }
            }
        }
    }
    m
}

fn power(base: &ShiftMap, e: usize) -> ShiftMap {
    (0..e).fold(ShiftMap::identity(base.dim()), |acc, _| base.compose(&acc))
}

/// Order-`k` block-commutator verdict on a level-`level` truncation,
/// compressed to `k1, k2 ≤ level − (2k+1)`.
fn operator_k_verdict(w: &WeightDiagram, k: usize, level: usize) -> Result<PsdVerdict> {
    let t = truncate(w, level)?;
    let t1 = ShiftMap::from_dense(&t.t1)?;
    let t2 = ShiftMap::from_dense(&t.t2)?;
    let powers: Vec<ShiftMap> = monomials(k)
        .into_iter()
        .map(|(p1, p2)| power(&t1, p1).compose(&power(&t2, p2)))
        .collect();
    let interior: Vec<usize> = LatticePoint::square(level - (2 * k + 1)).map(|p| t.index(p)).collect();
    psd_check_blockwise(&commutator_matrix(&powers, &interior), PSD_TOL)
}

/// The order-1 operator verdict rebuilt from six-point matrices: on the
/// interior `I`, the compressed commutator matrix is the direct sum of `M(k)`
/// (both `k+ε₁`, `k+ε₂` in `I`), single diagonal entries of `M(k)` (one of
/// them in `I`), and the positive numbers `α_k²`, `β_k²` on the axes.
fn weight_level_order_one(w: &WeightDiagram, interior_max: usize) -> (f64, f64) {
    let inside = |p: LatticePoint| p.k1 <= interior_max && p.k2 <= interior_max;
    let (mut min, mut norm) = (f64::INFINITY, 0.0f64);
    let mut take = |lo: f64, hi: f64| {
        min = min.min(lo);
        norm = norm.max(hi);
    };
    for k in LatticePoint::square(interior_max) {
        let m = six_point_matrix(w, k);
        match (inside(k.right()), inside(k.up())) {
            (true, true) => {
                let eig = m.symmetric_eigenvalues();
                take(eig.min(), eig.amax());
            }
            (true, false) => take(m[(0, 0)], m[(0, 0)].abs()),
            (false, true) => take(m[(1, 1)], m[(1, 1)].abs()),
            (false, false) => {}
        }
    }
    for j in 0..=interior_max {
        let a = w.alpha(LatticePoint::new(0, j)).powi(2);
        let b = w.beta(LatticePoint::new(j, 0)).powi(2);
        take(a, a);
        take(b, b);
    }
    (min, norm)
}

/// Joint hyponormality by six-point matrices on `[0, N]²`, cross-checked
/// against the order-1 commutator matrix on the interior `[0, N−3]²`.
pub fn joint_hyponormal(w: &WeightDiagram, level: usize) -> Result<HypoReport> {
    if level < 3 {
        return Err(Error::Window(format!("joint hyponormality needs level ≥ 3, got {level}")));
    }
    w.ensure_commuting(level + 1)?;
    let mut first_failure = None;
    let mut tightest: Option<(f64, Witness)> = None;
    for k in LatticePoint::square(level) {
        let (m, v) = six_point_test(w, k);
        if !v.is_psd && first_failure.is_none() {
            first_failure = Some(Witness::new(k, &m, &v));
        }
        if tightest.as_ref().is_none_or(|(s, _)| v.scaled_min() < *s) {
            tightest = Some((v.scaled_min(), Witness::new(k, &m, &v)));
        }
    }

    let interior_max = level - 3;
    let operator_level = operator_k_verdict(w, 1, level)?;
    let (min, norm) = weight_level_order_one(w, interior_max);
    let replicated = min >= -PSD_TOL * norm.max(1.0);
    if replicated != operator_level.is_psd {
        return Err(Error::internal(format!(
            "six-point scan on [0,{interior_max}]² says {replicated} (λ_min {min:e}) but the \
             commutator matrix says {} (λ_min {:e})",
            operator_level.is_psd, operator_level.min_eigenvalue
        )));
    }

    Ok(HypoReport {
        level,
        componentwise: componentwise_hyponormal(w, level),
        joint: first_failure.is_none(),
        k_hypo: BTreeMap::new(),
        worst_witness: first_failure,
        tightest: tightest.expect("window is non-empty").1,
        operator_level,
    })
}

/// Order-`k` test on the interior `k1, k2 ≤ N − (2k+1)` of a level-`N`
/// truncation; a necessary condition for k-hyponormality.
pub fn k_hyponormal(w: &WeightDiagram, k: usize, level: usize) -> Result<PsdVerdict> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    if level < 4 * k + 2 {
        return Err(Error::Window(format!("order {k} needs level ≥ {}, got {level}", 4 * k + 2)));
    }
    w.ensure_commuting(level)?;
    operator_k_verdict(w, k, level)
}

/// Smallest level accepted by [`k_hyponormal`] for order `k`.
pub fn min_level(k: usize) -> usize {
    4 * k + 2
}

/// Joint report plus k-hyponormality for `1..=kmax`, each order run at level
/// `max(level, 4k+2)`.
pub fn hypo_report(w: &WeightDiagram, kmax: usize, level: usize) -> Result<HypoReport> {
    let mut report = joint_hyponormal(w, level)?;
    for k in 1..=kmax {
        let v = k_hyponormal(w, k, level.max(min_level(k)))?;
        report.k_hypo.insert(k, v.is_psd);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HankelVerdict {
    pub k: usize,
    pub nmax: usize,
    pub holds: bool,
    pub first_failure: Option<usize>,
    /// Smallest eigenvalue over all tested (normalized) Hankel matrices.
    pub min_eigenvalue: f64,
}

/// PSD of `(γ_{n+i+j})_{0≤i,j≤k}` for `0 ≤ n ≤ nmax`, each normalized by
/// `diag(γ_{n+2i})^{-1/2}` on both sides.
pub fn one_var_k_hyponormal(omega: &OneVarWeights, k: usize, nmax: usize) -> Result<HankelVerdict> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    let gamma = omega.moments(nmax + 2 * k);
    let mut first_failure = None;
    let mut min_eig = f64::INFINITY;
    for n in 0..=nmax {
        let h = DMatrix::from_fn(k + 1, k + 1, |i, j| {
            gamma[n + i + j] / (gamma[n + 2 * i] * gamma[n + 2 * j]).sqrt()
        });
        let v = psd_check(&h, PSD_TOL)?;
        min_eig = min_eig.min(v.min_eigenvalue);
        if !v.is_psd && first_failure.is_none() {
            first_failure = Some(n);
        }
    }
    Ok(HankelVerdict { k, nmax, holds: first_failure.is_none(), first_failure, min_eigenvalue: min_eig })
}

/// Block commutator test `([T*^j, T^i])_{1≤i,j≤k}` for the one-variable shift
/// truncated to `e_0, …, e_level`, compressed to `e_0, …, e_{level−2k−1}`.
pub fn one_var_k_hyponormal_operator(omega: &OneVarWeights, k: usize, level: usize) -> Result<PsdVerdict> {
    if k == 0 || level < 2 * k + 1 {
        return Err(Error::Window(format!("order {k} needs level ≥ {}", 2 * k + 1)));
    }
    let n = level + 1;
    let mut t = DMatrix::zeros(n, n);
    for j in 0..level {
        t[(j + 1, j)] = omega.weight(j);
    }
    let t = ShiftMap::from_dense(&t)?;
    let powers: Vec<ShiftMap> = (1..=k).map(|e| power(&t, e)).collect();
    let interior: Vec<usize> = (0..=level - (2 * k + 1)).collect();
    psd_check_blockwise(&commutator_matrix(&powers, &interior), PSD_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psd_examples() {
        assert!(psd_check(&DMatrix::identity(3, 3), PSD_TOL).unwrap().is_psd);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0, -1e-6]));
        assert!(!psd_check(&d, 1e-10).unwrap().is_psd);
        let ones = DMatrix::from_element(2, 2, 1.0);
        let v = psd_check(&ones, PSD_TOL).unwrap();
        assert!(v.is_psd && v.min_eigenvalue.abs() < 1e-15);
    }

    #[test]
    fn monomial_order() {
        assert_eq!(monomials(2), vec![(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
        assert_eq!(monomials(3).len(), 9);
    }

    #[test]
    fn flat_six_point_is_zero() {
        let (m, v) = six_point_test(&WeightDiagram::flat(), LatticePoint::new(2, 3));
        assert_eq!(m, Matrix2::zeros());
        assert!(v.is_psd);
    }

    #[test]
    fn prop2_joint_threshold() {
        let h = 0.68f64.sqrt();
        let above = joint_hyponormal(&WeightDiagram::prop2(h + 0.01, 0.6).unwrap(), 12).unwrap();
        assert!(!above.joint);
        assert_eq!(above.worst_witness.unwrap().point, LatticePoint::ORIGIN);
        let below = joint_hyponormal(&WeightDiagram::prop2(h - 0.01, 0.6).unwrap(), 12).unwrap();
        assert!(below.joint);

        let split = joint_hyponormal(&WeightDiagram::prop2(0.83, 0.6).unwrap(), 12).unwrap();
        assert!(!split.joint);
        assert_eq!(split.componentwise, (true, true));
    }

    #[test]
    fn k_hypo_on_prop2() {
        let w = WeightDiagram::prop2(0.7, 0.6).unwrap();
        assert!(k_hyponormal(&w, 1, 10).unwrap().is_psd);
        assert!(joint_hyponormal(&w, 10).unwrap().joint);
        let sub = WeightDiagram::prop2(0.6, 0.6).unwrap();
        for k in 1..=3 {
            assert!(k_hyponormal(&sub, k, 4 * k + 2).unwrap().is_psd, "k = {k}");
        }
        assert!(matches!(k_hyponormal(&w, 2, 9), Err(Error::Window(_))));
    }

    #[test]
    fn one_var_examples() {
        let flat = OneVarWeights::constant(1.0).unwrap();
        for k in 1..=4 {
            assert!(one_var_k_hyponormal(&flat, k, 10).unwrap().holds);
        }
        let alt = OneVarWeights::periodic(vec![0.5, 2.0]).unwrap();
        let v = one_var_k_hyponormal(&alt, 1, 10).unwrap();
        assert!(!v.holds && v.first_failure == Some(1));
        assert!(!one_var_k_hyponormal_operator(&alt, 1, 10).unwrap().is_psd);

        let st = OneVarWeights::stampfli(1.0, 2.0, 3.0).unwrap();
        for k in 1..=3 {
            assert!(one_var_k_hyponormal(&st, k, 12).unwrap().holds);
            assert!(one_var_k_hyponormal_operator(&st, k, 16).unwrap().is_psd);
        }
    }

    #[test]
    fn componentwise_examples() {
        let inc = OneVarWeights::table(vec![0.2, 0.5, 0.7, 1.0]).unwrap();
        assert_eq!(componentwise_hyponormal(&WeightDiagram::theta(inc).unwrap(), 8), (true, true));
        assert_eq!(componentwise_hyponormal(&WeightDiagram::prop2(0.4, 0.6).unwrap(), 8), (true, true));
        let alt = WeightDiagram::theta(OneVarWeights::periodic(vec![0.5, 2.0]).unwrap()).unwrap();
        assert_eq!(componentwise_hyponormal(&alt, 8), (false, false));
    }
}
