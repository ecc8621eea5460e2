//! Toral and spherical Aluthge transforms at the weight level.
//!
//! Toral: `α̃_k = √(α_k α_{k+ε₁})`, `β̃_k = √(β_k β_{k+ε₂})`.
//! Spherical: `α̂_k = α_k √(P_{k+ε₁}/P_k)`, `β̂_k = β_k √(P_{k+ε₂}/P_k)`,
//! the weights of `(√P U₁ √P, √P U₂ √P)` with `P_k = √(α_k² + β_k²)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::diagram::{WeightDiagram, DEFAULT_LEVEL, WEIGHT_TOL};
use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::linalg::{operator_norm, Diagonal, ShiftMap};
use crate::truncation::truncate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Toral,
    Spherical,
}

impl std::str::FromStr for TransformKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "toral" => Ok(TransformKind::Toral),
            "spherical" => Ok(TransformKind::Spherical),
            _ => Err(Error::domain(format!("unknown transform `{s}` (toral|spherical)"))),
        }
    }
}

/// Residual scan for commutativity of the toral candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToralCommutativity {
    /// Verdict of the closed-form weight conditions.
    pub commutes: bool,
    /// `max |α_{k+ε₂} α_{k+ε₁+ε₂} − α_{k+ε₁} α_{k+2ε₂}|`
    pub alpha_condition: f64,
    /// `max |β_{k+ε₁} β_{k+ε₁+ε₂} − β_{k+ε₂} β_{k+2ε₁}|`
    pub beta_condition: f64,
    /// Commutativity residual of the candidate itself.
    pub candidate_residual: f64,
    pub candidate_commutes: bool,
    pub worst: LatticePoint,
}

impl ToralCommutativity {
    /// The closed-form verdict and the direct verdict coincide.
    pub fn agrees(&self) -> bool {
        self.commutes == self.candidate_commutes
    }
}

pub fn toral_commutativity_test(w: &WeightDiagram, window: usize) -> Result<ToralCommutativity> {
    w.ensure_commuting(window + 1)?;
    let (mut ac, mut bc) = (0.0f64, 0.0f64);
    let mut worst = (0.0, LatticePoint::ORIGIN);
    for k in LatticePoint::square(window) {
        let a = (w.alpha(k.up()) * w.alpha(k.offset(1, 1)) - w.alpha(k.right()) * w.alpha(k.offset(0, 2))).abs();
        let b = (w.beta(k.right()) * w.beta(k.offset(1, 1)) - w.beta(k.up()) * w.beta(k.offset(2, 0))).abs();
        ac = ac.max(a);
        bc = bc.max(b);
        if a.max(b) > worst.0 {
            worst = (a.max(b), k);
        }
    }
    let (candidate_residual, _) = w.toral_of().commutativity_residual(window);
    Ok(ToralCommutativity {
        commutes: ac <= WEIGHT_TOL && bc <= WEIGHT_TOL,
        alpha_condition: ac,
        beta_condition: bc,
        candidate_residual,
        candidate_commutes: candidate_residual <= WEIGHT_TOL,
        worst: worst.1,
    })
}

/// Toral candidate together with its commutativity verdict.
#[derive(Debug, Clone)]
pub struct ToralTransform {
    pub candidate: WeightDiagram,
    pub commuting: bool,
    pub test: ToralCommutativity,
}

/// Toral transform, scanned for commutativity on `[0, DEFAULT_LEVEL]²`.
pub fn toral_transform(w: &WeightDiagram) -> Result<ToralTransform> {
    toral_transform_on(w, DEFAULT_LEVEL)
}

/// The candidate is returned even when it fails to commute.
pub fn toral_transform_on(w: &WeightDiagram, window: usize) -> Result<ToralTransform> {
    let test = toral_commutativity_test(w, window)?;
    Ok(ToralTransform { candidate: w.toral_of(), commuting: test.commutes, test })
}

/// Spherical transform, validated on `[0, DEFAULT_LEVEL]²`.
pub fn spherical_transform(w: &WeightDiagram) -> Result<WeightDiagram> {
    spherical_transform_on(w, DEFAULT_LEVEL)
}

/// Spherical transform; the output's commutativity is checked on `[0, window]²`
/// rather than assumed.
pub fn spherical_transform_on(w: &WeightDiagram, window: usize) -> Result<WeightDiagram> {
    w.ensure_commuting(window + 1)?;
    for k in LatticePoint::square(window + 1) {
        if !(w.polar(k) > 0.0) {
            return Err(Error::DegeneratePolar(k));
        }
    }
    let out = w.spherical_of();
    let (residual, at) = out.commutativity_residual(window);
    if residual > WEIGHT_TOL {
        return Err(Error::internal(format!(
            "spherical transform fails to commute: residual {residual:e} at {at}"
        )));
    }
    Ok(out)
}

/// The transform of the requested kind (toral candidates unchecked).
pub fn transform(w: &WeightDiagram, which: TransformKind, window: usize) -> Result<WeightDiagram> {
    match which {
        TransformKind::Toral => Ok(toral_transform_on(w, window)?.candidate),
        TransformKind::Spherical => spherical_transform_on(w, window),
    }
}

/// Joint polar data `T_i = U_i P`: `P_k` and the coefficients `α_k/P_k`, `β_k/P_k`.
#[derive(Debug, Clone)]
pub struct SphericalPolarData {
    w: WeightDiagram,
}

impl SphericalPolarData {
    pub fn new(w: &WeightDiagram) -> Self {
        SphericalPolarData { w: w.clone() }
    }

    pub fn p(&self, k: LatticePoint) -> f64 {
        self.w.polar(k)
    }

    pub fn u1(&self, k: LatticePoint) -> f64 {
        self.w.alpha(k) / self.p(k)
    }

    pub fn u2(&self, k: LatticePoint) -> f64 {
        self.w.beta(k) / self.p(k)
    }

    /// `max |u1² + u2² − 1|` on the window.
    pub fn isometry_defect(&self, window: usize) -> f64 {
        LatticePoint::square(window)
            .map(|k| (self.u1(k).powi(2) + self.u2(k).powi(2) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialIsometryReport {
    /// `‖PQ²P − P²‖_max` over interior basis vectors.
    pub residual: f64,
    /// Range of the interior diagonal of `Q² = U₁*U₁ + U₂*U₂`.
    pub q2_diag_min: f64,
    pub q2_diag_max: f64,
}

/// Builds `U_i = T_i P⁻¹` on a level-`level` truncation and measures
/// `PQ²P − P²` on the interior `k1, k2 < level`, where no column of `T_i` is cut.
pub fn joint_partial_isometry_check(w: &WeightDiagram, level: usize) -> Result<PartialIsometryReport> {
    w.ensure_commuting(level)?;
    let t = truncate(w, level)?;
    if let Some(i) = t.p_diag.iter().position(|p| !(*p > 0.0)) {
        return Err(Error::DegeneratePolar(t.point(i)));
    }
    let p_inv = DMatrix::from_diagonal(&DVector::from_iterator(t.dim(), t.p_diag.iter().map(|p| 1.0 / p)));
    let u1 = &t.t1 * &p_inv;
    let u2 = &t.t2 * &p_inv;
    let q2 = u1.tr_mul(&u1) + u2.tr_mul(&u2);
    let p = t.p_matrix();
    let defect = &p * &q2 * &p - &p * &p;
    let interior: Vec<usize> = LatticePoint::square(level - 1).map(|k| t.index(k)).collect();
    let mut residual = 0.0f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &i in &interior {
        for &j in &interior {
            residual = residual.max(defect[(i, j)].abs());
        }
        lo = lo.min(q2[(i, i)]);
        hi = hi.max(q2[(i, i)]);
    }
    Ok(PartialIsometryReport { residual, q2_diag_min: lo, q2_diag_max: hi })
}

/// `f_n(t) = √max(1/n, t)`.
pub fn f_n(n: u32, t: f64) -> f64 {
    (1.0 / n as f64).max(t).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundPair {
    pub lhs: f64,
    pub rhs: f64,
}

impl BoundPair {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// The five inequalities, (v) reported as the worse of `i = 1, 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Re4Bounds {
    pub i: BoundPair,
    pub ii: BoundPair,
    pub iii: BoundPair,
    pub iv: BoundPair,
    pub v: BoundPair,
}

impl Re4Bounds {
    pub fn named(&self) -> [(&'static str, BoundPair); 5] {
        [("i", self.i), ("ii", self.ii), ("iii", self.iii), ("iv", self.iv), ("v", self.v)]
    }

    pub fn min_slack(&self) -> f64 {
        self.named().iter().map(|(_, b)| b.slack()).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityProbe {
    pub n: u32,
    pub level: usize,
    /// Diagonal of `A_n` in truncation order.
    pub a_n_diag: Vec<f64>,
    #[serde(rename = "lemma_re4")]
    pub bounds: Re4Bounds,
    /// Both components of (v).
    pub v_components: [BoundPair; 2],
}

impl ContinuityProbe {
    pub fn holds(&self, slack: f64) -> bool {
        self.bounds.min_slack() >= -slack
    }
}

/// Measures the norms in the regularization bounds for `A_n = f_n(P)`, with
/// all operators on a level-`level` truncation. `P` is diagonal there, so
/// `A_n`, `A_n⁻¹` and `P^{1/2}` are diagonal and `A_n T_i A_n⁻¹`,
/// `√P U_i √P` share the sparsity of `T_i`.
pub fn continuity_probe(w: &WeightDiagram, level: usize, n: u32) -> Result<ContinuityProbe> {
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    w.ensure_commuting(level)?;
    let t = truncate(w, level)?;
    if let Some(i) = t.p_diag.iter().position(|p| !(*p > 0.0)) {
        return Err(Error::DegeneratePolar(t.point(i)));
    }
    let p = &t.p_diag;
    let a: Vec<f64> = p.iter().map(|&pk| f_n(n, pk)).collect();
    let inv_sqrt_n = (n as f64).sqrt().recip();
    let norm_p = p.iter().copied().fold(0.0, f64::max);
    let diag = |f: &dyn Fn(usize) -> f64| Diagonal((0..p.len()).map(f).collect());

    let i = BoundPair {
        lhs: operator_norm(&Diagonal(a.clone())),
        rhs: inv_sqrt_n.max(norm_p.sqrt()),
    };
    let ii = BoundPair { lhs: operator_norm(&diag(&|k| p[k] / a[k])), rhs: norm_p.sqrt() };
    let iii = BoundPair { lhs: operator_norm(&diag(&|k| a[k] - p[k].sqrt())), rhs: inv_sqrt_n };
    let iv = BoundPair {
        lhs: operator_norm(&diag(&|k| p[k] / a[k] - p[k].sqrt())),
        rhs: 0.25 * inv_sqrt_n,
    };
    let mut v_components = [BoundPair { lhs: 0.0, rhs: 0.0 }; 2];
    for (slot, ti) in v_components.iter_mut().zip([&t.t1, &t.t2]) {
        let shift = ShiftMap::from_dense(ti)?;
        let diff = shift.map_values(|col, row, v| v * (a[row] / a[col] - (p[row] / p[col]).sqrt()));
        *slot = BoundPair {
            lhs: operator_norm(&diff),
            rhs: 1.25 * inv_sqrt_n * operator_norm(&shift).sqrt(),
        };
    }
    let v = if v_components[0].slack() <= v_components[1].slack() { v_components[0] } else { v_components[1] };
    Ok(ContinuityProbe { n, level, a_n_diag: a, bounds: Re4Bounds { i, ii, iii, iv, v }, v_components })
}

/// `max_i ‖T̃_i − T̃'_i‖` on a level-`level` truncation of the selected transforms.
pub fn transform_distance(
    w: &WeightDiagram,
    other: &WeightDiagram,
    which: TransformKind,
    level: usize,
) -> Result<f64> {
    let a = truncate(&transform(w, which, level)?, level)?;
    let b = truncate(&transform(other, which, level)?, level)?;
    let mut worst = 0.0f64;
    for i in [1, 2] {
        let d = ShiftMap::from_dense(&(a.t(i) - b.t(i)))?;
        worst = worst.max(operator_norm(&d));
    }
    Ok(worst)
}

/// `max_i ‖T_i‖` on a truncation.
pub fn truncated_norm(w: &WeightDiagram, level: usize) -> Result<f64> {
    let t = truncate(w, level)?;
    let mut worst = 0.0f64;
    for i in [1, 2] {
        worst = worst.max(operator_norm(&ShiftMap::from_dense(t.t(i))?));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::onevar::OneVarWeights;
    use approx::assert_abs_diff_eq;

    fn p(k1: usize, k2: usize) -> LatticePoint {
        LatticePoint::new(k1, k2)
    }

    #[test]
    fn toral_of_theta() {
        let omega = OneVarWeights::table(vec![0.3, 0.5, 0.8, 0.9, 1.0]).unwrap();
        let w = WeightDiagram::theta(omega.clone()).unwrap();
        let t = toral_transform(&w).unwrap();
        assert!(t.commuting && t.test.agrees());
        for k in LatticePoint::square(5) {
            let j = k.degree();
            let expect = (omega.weight(j) * omega.weight(j + 1)).sqrt();
            assert_abs_diff_eq!(t.candidate.alpha(k), expect, epsilon = 1e-15);
            assert_abs_diff_eq!(t.candidate.beta(k), expect, epsilon = 1e-15);
        }
        let s = spherical_transform(&w).unwrap();
        assert!(s.max_weight_deviation(&t.candidate, 10) <= 1e-12);
    }

    #[test]
    fn alternating_theta_becomes_flat() {
        let w = WeightDiagram::theta(OneVarWeights::periodic(vec![0.5, 2.0]).unwrap()).unwrap();
        let t = toral_transform(&w).unwrap().candidate;
        assert!(t.max_weight_deviation(&WeightDiagram::flat(), 8) <= 1e-15);
    }

    #[test]
    fn prop2_spherical_value() {
        let w = WeightDiagram::prop2(0.5, 0.5).unwrap();
        let s = spherical_transform(&w).unwrap();
        let expect = 0.5 * (1.25f64.sqrt() / (0.5 * 2f64.sqrt())).sqrt();
        assert_abs_diff_eq!(s.alpha(p(0, 0)), expect, epsilon = 1e-15);
        assert_abs_diff_eq!(s.alpha(p(0, 0)), 0.628716, epsilon = 1e-6);
        assert!(toral_transform(&w).unwrap().commuting);
    }

    #[test]
    fn flat_is_fixed() {
        let f = WeightDiagram::flat();
        assert_eq!(toral_transform(&f).unwrap().candidate.max_weight_deviation(&f, 6), 0.0);
        assert_eq!(spherical_transform(&f).unwrap().max_weight_deviation(&f, 6), 0.0);
    }

    #[test]
    fn partial_isometry() {
        let r = joint_partial_isometry_check(&WeightDiagram::prop2(0.3, 0.8).unwrap(), 8).unwrap();
        assert!(r.residual <= 1e-12);
        let flat = joint_partial_isometry_check(&WeightDiagram::flat(), 4).unwrap();
        assert_abs_diff_eq!(flat.q2_diag_min, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(flat.q2_diag_max, 1.0, epsilon = 1e-15);
        let polar = SphericalPolarData::new(&WeightDiagram::prop2(0.3, 0.8).unwrap());
        assert!(polar.isometry_defect(6) < 1e-15);
    }

    #[test]
    fn f_n_values() {
        assert_abs_diff_eq!(f_n(100, 0.04), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(f_n(100, 0.005), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn re4_on_prop2() {
        let w = WeightDiagram::prop2(0.5, 0.5).unwrap();
        for n in [1, 10, 100, 10_000] {
            let probe = continuity_probe(&w, 6, n).unwrap();
            assert!(probe.holds(1e-10), "n = {n}: {:?}", probe.bounds);
            assert!(probe.a_n_diag.iter().all(|a| *a >= (n as f64).sqrt().recip()));
        }
    }

    #[test]
    fn distances() {
        let w = WeightDiagram::prop2(0.5, 0.5).unwrap();
        assert_eq!(transform_distance(&w, &w, TransformKind::Spherical, 6).unwrap(), 0.0);
        let omega = OneVarWeights::table(vec![0.4, 0.6, 0.9]).unwrap();
        let a = WeightDiagram::theta(omega.clone()).unwrap();
        let b = WeightDiagram::theta(omega.scaled(1.5).unwrap()).unwrap();
        let d = transform_distance(&a, &b, TransformKind::Toral, 6).unwrap();
        let norm = truncated_norm(&toral_transform(&a).unwrap().candidate, 6).unwrap();
        assert_abs_diff_eq!(d, 0.5 * norm, epsilon = 1e-9);
    }
}
