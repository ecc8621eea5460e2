//! Moments `γ_(m,n)` of a commuting 2-variable weighted shift.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::diagram::WeightDiagram;
use crate::error::{Error, Result};
use crate::lattice::LatticePoint;

/// Relative tolerance for moment comparisons.
pub const MOMENT_REL_TOL: f64 = 1e-10;

/// Floor on denominators of relative moment errors.
pub const MOMENT_DENOM_FLOOR: f64 = 1e-30;

/// `γ_(0,0) = 1`, `γ_(m+1,n) = α_(m,n)² γ_(m,n)`, `γ_(m,n+1) = β_(m,n)² γ_(m,n)`,
/// for `m + n ≤ maxdeg`.
#[derive(Debug, Clone, Serialize)]
pub struct MomentTable {
    pub maxdeg: usize,
    gamma: BTreeMap<(usize, usize), f64>,
    /// Largest relative gap between the row-first and column-first recursions.
    pub path_deviation: f64,
}

impl MomentTable {
    pub fn get(&self, m: usize, n: usize) -> Option<f64> {
        self.gamma.get(&(m, n)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.gamma.iter().map(|(k, v)| (*k, *v))
    }
}

/// `|a − b| / max(|b|, floor)`
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(MOMENT_DENOM_FLOOR)
}

/// Computes γ along rows first (α along the bottom row, then β up each column)
/// and along columns first; they agree exactly when the pair commutes.
pub fn moments(w: &WeightDiagram, maxdeg: usize) -> Result<MomentTable> {
    let mut row_first = BTreeMap::new();
    let mut col_first = BTreeMap::new();

    let mut g = 1.0;
    for m in 0..=maxdeg {
        let mut h = g;
        for n in 0..=maxdeg - m {
            row_first.insert((m, n), h);
            h *= w.beta(LatticePoint::new(m, n)).powi(2);
        }
        g *= w.alpha(LatticePoint::new(m, 0)).powi(2);
    }

    let mut g = 1.0;
    for n in 0..=maxdeg {
        let mut h = g;
        for m in 0..=maxdeg - n {
            col_first.insert((m, n), h);
            h *= w.alpha(LatticePoint::new(m, n)).powi(2);
        }
        g *= w.beta(LatticePoint::new(0, n)).powi(2);
    }

    let mut path_deviation = 0.0f64;
    let mut worst = (0, 0);
    for (key, a) in &row_first {
        let d = relative_error(col_first[key], *a);
        if d > path_deviation || d.is_nan() {
            path_deviation = if d.is_nan() { f64::INFINITY } else { d };
            worst = *key;
        }
    }
    if path_deviation > MOMENT_REL_TOL {
        return Err(Error::NonCommuting {
            at: LatticePoint::new(worst.0, worst.1),
            residual: path_deviation,
        });
    }
    Ok(MomentTable { maxdeg, gamma: row_first, path_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::onevar::OneVarWeights;

    #[test]
    fn flat_moments_are_one() {
        let t = moments(&WeightDiagram::flat(), 8).unwrap();
        assert!(t.iter().all(|(_, g)| g == 1.0));
        assert_eq!(t.iter().count(), 45);
    }

    #[test]
    fn completion_low_moments() {
        let row = OneVarWeights::stampfli(1.0, 2.0, 3.0).unwrap();
        let w = WeightDiagram::quasinormal_completion(row, 4.0, 12).unwrap();
        let t = moments(&w, 4).unwrap();
        assert!((t.get(1, 0).unwrap() - 1.0).abs() < 1e-12);
        assert!((t.get(0, 1).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn theta_moments_depend_on_total_degree() {
        let w = WeightDiagram::theta(OneVarWeights::table(vec![0.5, 0.8, 1.1, 1.2]).unwrap()).unwrap();
        let t = moments(&w, 10).unwrap();
        for ((m, n), g) in t.iter() {
            let diag = t.get(m + n, 0).unwrap();
            assert!(relative_error(g, diag) < 1e-14);
        }
    }

    #[test]
    fn non_commuting_detected() {
        let mut t = WeightDiagram::prop2(0.5, 0.5).unwrap().tabulate(4);
        t.alpha[1][1] = 1.3;
        let bad = WeightDiagram::table_unchecked(t);
        assert!(matches!(moments(&bad, 4), Err(Error::NonCommuting { .. })));
    }
}
