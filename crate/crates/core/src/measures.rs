//! Stampfli's 2-atomic shifts, spherical quasinormality, and atomic Berger
//! measures checked at the level of moments.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::diagram::{WeightDiagram, DEFAULT_COMPLETION_WINDOW, WEIGHT_TOL};
use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::moments::{moments, relative_error, MOMENT_REL_TOL};
use crate::onevar::{Atom1, AtomicMeasure1, OneVarWeights};
use crate::truncation::truncate;

/// Tolerance for the fixed-point side of the quasinormality cross-check; the
/// transform perturbs each weight by roughly `spread / (4 P²)`, so this is
/// looser than the constant-sum test itself.
pub const FIXED_POINT_TOL: f64 = 1e-10;

/// The subnormal shift with first three weights `√a, √b, √c` and its
/// 2-atomic Berger measure `ρ₀ δ_{s₀} + ρ₁ δ_{s₁}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StampfliData {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub phi0: f64,
    pub phi1: f64,
    pub s0: f64,
    pub s1: f64,
    pub rho0: f64,
    pub rho1: f64,
}

impl StampfliData {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && a < b && b < c && c.is_finite()) {
            return Err(Error::domain(format!("need 0 < a < b < c, got ({a}, {b}, {c})")));
        }
        let phi0 = -a * b * (c - b) / (b - a);
        let phi1 = b * (c - a) / (b - a);
        let disc = phi1 * phi1 + 4.0 * phi0;
        if !(disc > 0.0) {
            return Err(Error::internal(format!("Stampfli discriminant {disc} is not positive")));
        }
        let root = disc.sqrt();
        let s0 = (phi1 - root) / 2.0;
        let s1 = (phi1 + root) / 2.0;
        let rho0 = (s1 - a) / (s1 - s0);
        let rho1 = (a - s0) / (s1 - s0);
        if !(s0 > 0.0 && rho0 > 0.0 && rho1 > 0.0) {
            return Err(Error::internal(format!(
                "Stampfli data out of range: s0 = {s0}, rho0 = {rho0}, rho1 = {rho1}"
            )));
        }
        Ok(StampfliData { a, b, c, phi0, phi1, s0, s1, rho0, rho1 })
    }

    pub fn measure(&self) -> AtomicMeasure1 {
        AtomicMeasure1 {
            atoms: vec![Atom1 { s: self.s0, rho: self.rho0 }, Atom1 { s: self.s1, rho: self.rho1 }],
        }
    }

    pub fn weights(&self) -> OneVarWeights {
        OneVarWeights::Stampfli { a: self.a, b: self.b, c: self.c }
    }
}

/// Convenience wrapper returning the data and the weight sequence together.
pub fn stampfli(a: f64, b: f64, c: f64) -> Result<(StampfliData, OneVarWeights)> {
    let data = StampfliData::new(a, b, c)?;
    Ok((data, data.weights()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom2 {
    pub s: f64,
    pub t: f64,
    pub rho: f64,
}

/// Finitely atomic probability measure on `[0, ∞)²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure2D {
    pub atoms: Vec<Atom2>,
}

impl AtomicMeasure2D {
    pub fn new(atoms: Vec<Atom2>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::domain("measure has no atoms"));
        }
        for (i, a) in atoms.iter().enumerate() {
            if !(a.s >= 0.0 && a.t >= 0.0 && a.rho > 0.0)
                || !(a.s.is_finite() && a.t.is_finite() && a.rho.is_finite())
            {
                return Err(Error::domain(format!("atom {i} ({}, {}; {}) is invalid", a.s, a.t, a.rho)));
            }
            if atoms[..i].iter().any(|b| b.s == a.s && b.t == a.t) {
                return Err(Error::domain(format!("duplicate atom at ({}, {})", a.s, a.t)));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.rho).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("masses sum to {total}, not 1")));
        }
        Ok(AtomicMeasure2D { atoms })
    }

    /// `∫ s^m t^n dμ`
    pub fn moment(&self, m: usize, n: usize) -> f64 {
        self.atoms.iter().map(|a| a.rho * a.s.powi(m as i32) * a.t.powi(n as i32)).sum()
    }
}

/// Outcome of [`is_spherically_quasinormal`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasinormalVerdict {
    pub quasinormal: bool,
    /// `C` when `α² + β²` is constant on the window.
    pub constant: Option<f64>,
    /// `max − min` of `α_k² + β_k²` on the window.
    pub spread: f64,
    /// Whether the spherical transform reproduces the diagram.
    pub fixed_point: bool,
    pub fixed_point_deviation: f64,
    pub spherical_isometry: bool,
}

/// Decides `α_k² + β_k² ≡ C` on `[0, window]²` and cross-checks it against
/// the fixed-point property of the spherical transform.
pub fn is_spherically_quasinormal(w: &WeightDiagram, window: usize) -> Result<QuasinormalVerdict> {
    w.ensure_commuting(window)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in LatticePoint::square(window) {
        let p2 = w.alpha(k).powi(2) + w.beta(k).powi(2);
        if !(p2 > 0.0) {
            return Err(Error::DegeneratePolar(k));
        }
        lo = lo.min(p2);
        hi = hi.max(p2);
    }
    let spread = hi - lo;
    let quasinormal = spread <= WEIGHT_TOL;
    let constant = quasinormal.then_some((hi + lo) / 2.0);

    // The transform at k reads P at k + ε_i, so compare one step inside.
    let inner = window.saturating_sub(1);
    let fixed_point_deviation = w.spherical_of().max_weight_deviation(w, inner);
    let fixed_point = fixed_point_deviation <= FIXED_POINT_TOL;
    if fixed_point != quasinormal && window > 0 {
        return Err(Error::internal(format!(
            "constant-sum test says {quasinormal} (spread {spread:e}) but fixed-point test says \
             {fixed_point} (deviation {fixed_point_deviation:e})"
        )));
    }
    Ok(QuasinormalVerdict {
        quasinormal,
        constant,
        spread,
        fixed_point,
        fixed_point_deviation,
        spherical_isometry: constant.is_some_and(|c| (c - 1.0).abs() <= WEIGHT_TOL),
    })
}

/// Whether the interior diagonal of `T₁*T₁ + T₂*T₂` on a level-`level`
/// truncation is constant (within [`WEIGHT_TOL`] relative to `max(1, C)`).
pub fn gram_diagonal_constant(w: &WeightDiagram, level: usize) -> Result<(bool, f64)> {
    let t = truncate(w, level)?;
    let g = t.t1.tr_mul(&t.t1) + t.t2.tr_mul(&t.t2);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in LatticePoint::square(level - 1) {
        let d = g[(t.index(k), t.index(k))];
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let spread = hi - lo;
    Ok((spread <= WEIGHT_TOL * hi.max(1.0), spread))
}

/// Completion from the zero-th row with the default feasibility window.
pub fn quasinormal_completion(row: OneVarWeights, constant: f64) -> Result<WeightDiagram> {
    WeightDiagram::quasinormal_completion(row, constant, DEFAULT_COMPLETION_WINDOW)
}

/// `ρ₀ δ_(s₀,s₁) + ρ₁ δ_(s₁,s₀)` built from the Stampfli data of `(a, b, c)`.
pub fn quasinormal2_measure(a: f64, b: f64, c: f64) -> Result<AtomicMeasure2D> {
    let d = StampfliData::new(a, b, c)?;
    Ok(AtomicMeasure2D {
        atoms: vec![
            Atom2 { s: d.s0, t: d.s1, rho: d.rho0 },
            Atom2 { s: d.s1, t: d.s0, rho: d.rho1 },
        ],
    })
}

/// Largest relative error between the weight moments of `w` and the moments
/// of `mu`, over `m + n ≤ maxdeg`.
pub fn berger_atomic_verify(w: &WeightDiagram, mu: &AtomicMeasure2D, maxdeg: usize) -> Result<f64> {
    let table = moments(w, maxdeg)?;
    Ok(table
        .iter()
        .map(|((m, n), g)| relative_error(g, mu.moment(m, n)))
        .fold(0.0, f64::max))
}

/// `max_{n ≤ nmax} ‖Q_Tⁿ(I) − Q_T(I)ⁿ‖_max / max(1, ‖Q_T(I)ⁿ‖_max)` over the
/// basis vectors `e_k` with `k1, k2 ≤ level − nmax`, where
/// `Q_T(X) = T₁*XT₁ + T₂*XT₂`.
pub fn qt_power_identity_check(w: &WeightDiagram, nmax: usize, level: usize) -> Result<f64> {
    if level <= nmax {
        return Err(Error::Window(format!("level {level} must exceed nmax {nmax}")));
    }
    let t = truncate(w, level)?;
    let q = |x: &DMatrix<f64>| t.t1.tr_mul(&(x * &t.t1)) + t.t2.tr_mul(&(x * &t.t2));
    let n = t.dim();
    let q1 = q(&DMatrix::identity(n, n));
    let interior: Vec<usize> = LatticePoint::square(level - nmax).map(|k| t.index(k)).collect();

    let mut iterate = DMatrix::identity(n, n);
    let mut power = DMatrix::identity(n, n);
    let mut worst = 0.0f64;
    for _ in 1..=nmax {
        iterate = q(&iterate);
        power = &power * &q1;
        let scale = interior
            .iter()
            .flat_map(|&i| interior.iter().map(move |&j| (i, j)))
            .map(|(i, j)| power[(i, j)].abs())
            .fold(1.0, f64::max);
        for &i in &interior {
            for &j in &interior {
                worst = worst.max((iterate[(i, j)] - power[(i, j)]).abs() / scale);
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thm1ProbeRow {
    pub m: usize,
    pub n: usize,
    pub weight_moment: f64,
    /// `γ_{m+n}` of the one-variable shift.
    pub diagonal_moment: f64,
    /// `weight_moment / diagonal_moment`.
    pub ratio: f64,
    /// `t₀ⁿ` with `t₀ = √(y/a)`: the multiplicative reading of the convolution.
    pub point_mass_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thm1Probe {
    pub a: f64,
    pub y: f64,
    pub t0: f64,
    pub rows: Vec<Thm1ProbeRow>,
    /// Largest relative error against `γ_{m+n} · t₀ⁿ`.
    pub multiplicative_error: f64,
    /// Largest relative error against `γ_{m+n} · (y/a)^{2n}`, the scaling the
    /// weights themselves impose.
    pub weight_scaling_error: f64,
    pub matches_multiplicative: bool,
    pub matches_weight_scaling: bool,
}

/// Compares the moments of `thm1(ω, y)` with the product of the diagonal
/// moments `γ_{m+n}` and the point mass at `(1, √(y/a))`. Reports only.
pub fn thm1_measure_probe(omega: &OneVarWeights, y: f64, maxdeg: usize) -> Result<Thm1Probe> {
    let w = WeightDiagram::thm1(omega.clone(), y)?;
    let table = moments(&w, maxdeg)?;
    let gamma = omega.moments(maxdeg);
    let a = omega.weight(0);
    let t0 = (y / a).sqrt();
    let mut rows = Vec::new();
    let (mut mult, mut scal) = (0.0f64, 0.0f64);
    for ((m, n), g) in table.iter() {
        let diag = gamma[m + n];
        let factor = t0.powi(n as i32);
        mult = mult.max(relative_error(g, diag * factor));
        scal = scal.max(relative_error(g, diag * (y / a).powi(2 * n as i32)));
        rows.push(Thm1ProbeRow {
            m,
            n,
            weight_moment: g,
            diagonal_moment: diag,
            ratio: g / diag,
            point_mass_factor: factor,
        });
    }
    Ok(Thm1Probe {
        a,
        y,
        t0,
        rows,
        multiplicative_error: mult,
        weight_scaling_error: scal,
        matches_multiplicative: mult <= MOMENT_REL_TOL,
        matches_weight_scaling: scal <= MOMENT_REL_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn stampfli_123() {
        let d = StampfliData::new(1.0, 2.0, 3.0).unwrap();
        let r2 = 2f64.sqrt();
        assert_abs_diff_eq!(d.phi0, -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.phi1, 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.s0, 2.0 - r2, epsilon = 1e-14);
        assert_abs_diff_eq!(d.s1, 2.0 + r2, epsilon = 1e-14);
        assert_abs_diff_eq!(d.rho0, (1.0 + r2) / (2.0 * r2), epsilon = 1e-14);
        assert_abs_diff_eq!(d.rho0 + d.rho1, 1.0, epsilon = 1e-15);
        let w = d.weights();
        for (j, v) in [1.0, 2.0, 3.0].into_iter().enumerate() {
            assert_abs_diff_eq!(w.weight(j).powi(2), v, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(d.measure().moment(2), 2.0, epsilon = 1e-12);
        assert!(StampfliData::new(2.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn completion_of_123() {
        let w = quasinormal_completion(OneVarWeights::stampfli(1.0, 2.0, 3.0).unwrap(), 4.0).unwrap();
        assert_abs_diff_eq!(w.beta(LatticePoint::ORIGIN), 3f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(w.alpha(LatticePoint::new(0, 1)), (2.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        let v = is_spherically_quasinormal(&w, 10).unwrap();
        assert!(v.quasinormal && v.fixed_point);
        assert_abs_diff_eq!(v.constant.unwrap(), 4.0, epsilon = 1e-12);
        assert!(!v.spherical_isometry);

        let mu = quasinormal2_measure(1.0, 2.0, 3.0).unwrap();
        assert_abs_diff_eq!(mu.moment(0, 1), 3.0, epsilon = 1e-12);
        assert!(berger_atomic_verify(&w, &mu, 10).unwrap() <= 1e-10);

        let swapped = AtomicMeasure2D {
            atoms: mu.atoms.iter().map(|a| Atom2 { s: a.t, t: a.s, rho: a.rho }).collect(),
        };
        assert!(berger_atomic_verify(&w, &swapped, 10).unwrap() > 1e-2);
    }

    #[test]
    fn infeasible_constant() {
        let row = OneVarWeights::stampfli(1.0, 2.0, 3.0).unwrap();
        assert!(matches!(quasinormal_completion(row, 2.5), Err(Error::InfeasibleConstant { .. })));
    }

    #[test]
    fn prop2_is_not_quasinormal() {
        let v = is_spherically_quasinormal(&WeightDiagram::prop2(0.5, 0.5).unwrap(), 6).unwrap();
        assert!(!v.quasinormal && !v.fixed_point && v.constant.is_none());
        assert_abs_diff_eq!(v.spread, 1.5, epsilon = 1e-15);
    }

    #[test]
    fn isometry_and_flat() {
        let iso = quasinormal_completion(OneVarWeights::constant(0.6).unwrap(), 1.0).unwrap();
        assert!(is_spherically_quasinormal(&iso, 8).unwrap().spherical_isometry);

        let flat = WeightDiagram::flat();
        let delta = AtomicMeasure2D::new(vec![Atom2 { s: 1.0, t: 1.0, rho: 1.0 }]).unwrap();
        assert_eq!(berger_atomic_verify(&flat, &delta, 8).unwrap(), 0.0);

        let sym = quasinormal_completion(OneVarWeights::constant(0.7).unwrap(), 0.98).unwrap();
        assert!(sym.max_weight_deviation(&WeightDiagram::theta(OneVarWeights::constant(0.7).unwrap()).unwrap(), 8) < 1e-12);
    }

    #[test]
    fn qt_identity() {
        let w = quasinormal_completion(OneVarWeights::stampfli(1.0, 2.0, 4.0).unwrap(), 6.0).unwrap();
        assert!(qt_power_identity_check(&w, 5, 10).unwrap() <= 1e-10);
        let p = WeightDiagram::prop2(0.5, 0.5).unwrap();
        assert!(qt_power_identity_check(&p, 2, 6).unwrap() > 1e-3);
        assert!(qt_power_identity_check(&p, 3, 3).is_err());
    }

    #[test]
    fn gram_diagonal() {
        let w = quasinormal_completion(OneVarWeights::stampfli(2.0, 3.0, 5.0).unwrap(), 9.0).unwrap();
        assert!(gram_diagonal_constant(&w, 8).unwrap().0);
        assert!(!gram_diagonal_constant(&WeightDiagram::prop2(0.5, 0.5).unwrap(), 8).unwrap().0);
    }

    #[test]
    fn thm1_probe_reduces_at_y_equal_a() {
        let omega = OneVarWeights::stampfli(1.0, 2.0, 3.0).unwrap();
        let probe = thm1_measure_probe(&omega, 1.0, 6).unwrap();
        assert!(probe.matches_multiplicative && probe.matches_weight_scaling);
        let g11 = probe.rows.iter().find(|r| (r.m, r.n) == (1, 1)).unwrap();
        assert_abs_diff_eq!(g11.weight_moment, 2.0, epsilon = 1e-12);

        let other = thm1_measure_probe(&omega, 0.5, 6).unwrap();
        assert!(other.matches_weight_scaling);
        assert!(!other.matches_multiplicative);
    }
}
