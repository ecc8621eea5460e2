//! Seeded generators of random weight sequences and diagrams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagram::WeightDiagram;
use crate::error::{Error, Result};
use crate::onevar::{Atom1, AtomicMeasure1, OneVarWeights};

pub const DEFAULT_SEED: u64 = 0x005e_eda1_u64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Commuting table on `[0, R]²` from its zero-th `α` row and all of `β`,
/// using `α_{k+ε₂} = α_k β_{k+ε₁} / β_k`. The top row of `β` must be
/// constant so that the flat tail keeps commuting.
pub fn commuting_table(alpha_row: &[f64], beta: Vec<Vec<f64>>) -> Result<WeightDiagram> {
    let cols = alpha_row.len();
    if beta.is_empty() || beta.iter().any(|r| r.len() != cols) {
        return Err(Error::Shape("beta must have rows of the alpha row's length".into()));
    }
    let mut alpha = vec![alpha_row.to_vec()];
    for k2 in 0..beta.len() - 1 {
        let prev = &alpha[k2];
        let b = &beta[k2];
        let next = (0..cols)
            .map(|k1| prev[k1] * b[(k1 + 1).min(cols - 1)] / b[k1])
            .collect();
        alpha.push(next);
    }
    WeightDiagram::table(alpha, beta)
}

/// Generic commuting table with weights roughly in `[lo, hi]`.
pub fn random_commuting_table<R: Rng>(rng: &mut R, size: usize, lo: f64, hi: f64) -> Result<WeightDiagram> {
    let n = size + 1;
    let row: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    let mut beta: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(lo..hi)).collect()).collect();
    let top = rng.random_range(lo..hi);
    beta[n - 1] = vec![top; n];
    commuting_table(&row, beta)
}

fn sorted<R: Rng>(rng: &mut R, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len).map(|_| rng.random_range(lo..hi)).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Finitely atomic probability measure with 1–3 atoms in `[lo, hi]`.
pub fn random_measure<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> AtomicMeasure1 {
    let count = rng.random_range(1..=3);
    let s = sorted(rng, count, lo, hi);
    let raw: Vec<f64> = (0..count).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut atoms: Vec<Atom1> = s.iter().zip(&raw).map(|(s, r)| Atom1 { s: *s, rho: r / total }).collect();
    // Absorb rounding so the masses sum to one.
    let rest: f64 = atoms[1..].iter().map(|a| a.rho).sum();
    atoms[0].rho = 1.0 - rest;
    AtomicMeasure1 { atoms }
}

/// Bounded nondecreasing sequence: either the weights of an atomic measure
/// (subnormal) or a short sorted table with flat tail.
pub fn random_monotone_omega<R: Rng>(rng: &mut R, max_table_len: usize) -> OneVarWeights {
    if rng.random_bool(0.5) {
        OneVarWeights::from_measure(random_measure(rng, 0.2, 2.0))
    } else {
        let len = rng.random_range(2..=max_table_len.max(2));
        OneVarWeights::Table { values: sorted(rng, len, 0.2, 1.5) }
    }
}

/// Commuting diagram that is nondecreasing along rows (α) and columns (β).
pub fn random_monotone_diagram<R: Rng>(rng: &mut R) -> Result<WeightDiagram> {
    match rng.random_range(0..4) {
        0 => WeightDiagram::theta(random_monotone_omega(rng, 6)),
        1 => {
            let omega = random_monotone_omega(rng, 6);
            let y = rng.random_range(0.2..2.0);
            WeightDiagram::thm1(omega, y)
        }
        2 => {
            let y = rng.random_range(0.05..0.95);
            let x = rng.random_range(0.02..y);
            WeightDiagram::prop2(x, y)
        }
        _ => {
            // α_k = f(k1), β_k = g(k2) with f, g nondecreasing.
            let n = rng.random_range(3..=7);
            let f = sorted(rng, n, 0.2, 1.5);
            let g = sorted(rng, n, 0.2, 1.5);
            let alpha = (0..n).map(|_| f.clone()).collect();
            let beta = (0..n).map(|k2| vec![g[k2]; n]).collect();
            WeightDiagram::table(alpha, beta)
        }
    }
}

/// Random `0 < a < b < c` with moderate gaps.
pub fn random_abc<R: Rng>(rng: &mut R) -> (f64, f64, f64) {
    let a = rng.random_range(0.2..2.0);
    let b = a + rng.random_range(0.1..2.0);
    let c = b + rng.random_range(0.1..2.0);
    (a, b, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_commute_and_are_reproducible() {
        let a = random_commuting_table(&mut rng(7), 5, 0.5, 1.5).unwrap();
        let b = random_commuting_table(&mut rng(7), 5, 0.5, 1.5).unwrap();
        assert_eq!(a.max_weight_deviation(&b, 8), 0.0);
        assert!(a.is_commuting(12));
    }

    #[test]
    fn monotone_diagrams_are_monotone() {
        let mut r = rng(11);
        for _ in 0..40 {
            let w = random_monotone_diagram(&mut r).unwrap();
            assert_eq!(crate::positivity::componentwise_hyponormal(&w, 10), (true, true));
        }
    }

    #[test]
    fn measures_are_probabilities() {
        let mut r = rng(3);
        for _ in 0..20 {
            let m = random_measure(&mut r, 0.2, 2.0);
            assert!(AtomicMeasure1::new(m.atoms.clone()).is_ok());
        }
    }
}
