//! Independent dense-matrix oracles for the weight-level formulas.

use aluthge_lab::diagram::WeightDiagram;
use aluthge_lab::linalg::{psd_check, PSD_TOL};
use aluthge_lab::measures::{quasinormal2_measure, StampfliData};
use aluthge_lab::onevar::OneVarWeights;
use aluthge_lab::positivity::{
    joint_hyponormal, k_hyponormal, monomials, one_var_k_hyponormal, one_var_k_hyponormal_operator,
    six_point_matrix,
};
use aluthge_lab::regions::{crossing_q, spherical_threshold, thresholds};
use aluthge_lab::sampling::{random_commuting_table, random_monotone_omega, rng};
use aluthge_lab::transforms::{spherical_transform, toral_transform};
use aluthge_lab::truncation::{truncate, TruncatedPair};
use aluthge_lab::LatticePoint;
use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;

/// `f(A)` for symmetric `A` through its eigendecomposition.
fn spectral(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let sym = (a + a.transpose()) * 0.5;
    let e = sym.symmetric_eigen();
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(f));
    &e.eigenvectors * d * e.eigenvectors.transpose()
}

fn sqrtm(a: &DMatrix<f64>) -> DMatrix<f64> {
    spectral(a, |l| l.max(0.0).sqrt())
}

fn pinv(a: &DMatrix<f64>) -> DMatrix<f64> {
    spectral(a, |l| if l.abs() > 1e-12 { 1.0 / l } else { 0.0 })
}

/// Reads `⟨S e_k, e_{k+shift}⟩` for every interior point and compares with `expect`.
fn compare_weights(
    s: &DMatrix<f64>,
    t: &TruncatedPair,
    shift: (usize, usize),
    interior: usize,
    expect: impl Fn(LatticePoint) -> f64,
) {
    for k in LatticePoint::square(interior) {
        let got = s[(t.index(k.offset(shift.0, shift.1)), t.index(k))];
        assert_abs_diff_eq!(got, expect(k), epsilon = 1e-10);
    }
}

#[test]
fn spherical_weights_match_dense_polar_decomposition() {
    let mut r = rng(21);
    let mut cases = vec![WeightDiagram::prop2(0.5, 0.5).unwrap(), WeightDiagram::prop2(0.84, 0.6).unwrap()];
    for _ in 0..3 {
        cases.push(random_commuting_table(&mut r, 4, 0.5, 1.5).unwrap());
    }
    let level = 7;
    for w in cases {
        let t = truncate(&w, level).unwrap();
        // P from T₁*T₁ + T₂*T₂ without using that it is diagonal.
        let p = sqrtm(&(t.t1.tr_mul(&t.t1) + t.t2.tr_mul(&t.t2)));
        let root_p = sqrtm(&p);
        let p_inv = pinv(&p);
        let s = spherical_transform(&w).unwrap();
        for (i, shift) in [(1, (1, 0)), (2, (0, 1))] {
            let u = t.t(i) * &p_inv;
            let hat = &root_p * u * &root_p;
            // Interior: the truncation corner has P = 0 on nothing, but the
            // last row/column of P is cut; stay two steps inside.
            compare_weights(&hat, &t, shift, level - 2, |k| if i == 1 { s.alpha(k) } else { s.beta(k) });
        }
    }
    let s = spherical_transform(&WeightDiagram::prop2(0.5, 0.5).unwrap()).unwrap();
    assert_abs_diff_eq!(s.alpha(LatticePoint::ORIGIN), 0.628716, epsilon = 1e-6);
}

#[test]
fn toral_weights_match_componentwise_polar_decomposition() {
    let mut r = rng(5);
    let level = 7;
    for _ in 0..3 {
        let w = random_commuting_table(&mut r, 4, 0.5, 1.5).unwrap();
        let t = truncate(&w, level).unwrap();
        let cand = toral_transform(&w).unwrap().candidate;
        for (i, shift) in [(1, (1, 0)), (2, (0, 1))] {
            let ti = t.t(i);
            let abs = sqrtm(&ti.tr_mul(ti));
            let u = ti * pinv(&abs);
            let root = sqrtm(&abs);
            let tilde = &root * u * &root;
            compare_weights(&tilde, &t, shift, level - 2, |k| if i == 1 { cand.alpha(k) } else { cand.beta(k) });
        }
    }
}

/// Block matrix `([(T^q)*, T^p])_{p,q}` from dense products.
fn dense_k_matrix(t: &TruncatedPair, k: usize) -> DMatrix<f64> {
    let pow = |m: &DMatrix<f64>, e: usize| (0..e).fold(DMatrix::identity(m.nrows(), m.ncols()), |acc, _| m * acc);
    let mons: Vec<DMatrix<f64>> = monomials(k).into_iter().map(|(a, b)| pow(&t.t1, a) * pow(&t.t2, b)).collect();
    let interior: Vec<usize> = LatticePoint::square(t.level - (2 * k + 1)).map(|p| t.index(p)).collect();
    let b = interior.len();
    let mut out = DMatrix::zeros(mons.len() * b, mons.len() * b);
    for (pi, tp) in mons.iter().enumerate() {
        for (qi, tq) in mons.iter().enumerate() {
            let c = tq.transpose() * tp - tp * tq.transpose();
            for (ii, &i) in interior.iter().enumerate() {
                for (jj, &j) in interior.iter().enumerate() {
                    out[(pi * b + ii, qi * b + jj)] = c[(i, j)];
                }
            }
        }
    }
    out
}

#[test]
fn k_hyponormality_matches_dense_commutators() {
    let cases = [
        WeightDiagram::prop2(0.6, 0.6).unwrap(),
        WeightDiagram::prop2(0.76, 0.6).unwrap(),
        WeightDiagram::prop2(0.9, 0.6).unwrap(),
        WeightDiagram::theta(OneVarWeights::table(vec![0.4, 0.8, 0.9, 1.0]).unwrap()).unwrap(),
    ];
    for w in &cases {
        for k in 1..=2 {
            let level = 4 * k + 2;
            let t = truncate(w, level).unwrap();
            let dense = psd_check(&dense_k_matrix(&t, k), PSD_TOL).unwrap();
            let fast = k_hyponormal(w, k, level).unwrap();
            assert_eq!(dense.is_psd, fast.is_psd);
            assert_abs_diff_eq!(dense.min_eigenvalue, fast.min_eigenvalue, epsilon = 1e-10);
        }
    }
}

#[test]
fn six_point_matrix_is_a_commutator_block() {
    let w = WeightDiagram::prop2(0.7, 0.45).unwrap();
    let t = truncate(&w, 6).unwrap();
    let c11 = t.t1.tr_mul(&t.t1) - &t.t1 * t.t1.transpose();
    let c22 = t.t2.tr_mul(&t.t2) - &t.t2 * t.t2.transpose();
    let c12 = t.t2.tr_mul(&t.t1) - &t.t1 * t.t2.transpose();
    for k in LatticePoint::square(3) {
        let m = six_point_matrix(&w, k);
        let (i, j) = (t.index(k.right()), t.index(k.up()));
        assert_abs_diff_eq!(m[(0, 0)], c11[(i, i)], epsilon = 1e-14);
        assert_abs_diff_eq!(m[(1, 1)], c22[(j, j)], epsilon = 1e-14);
        assert_abs_diff_eq!(m[(0, 1)], c12[(i, j)], epsilon = 1e-14);
    }
}

#[test]
fn hankel_matches_one_variable_commutators() {
    let mut r = rng(99);
    for _ in 0..15 {
        let omega = random_monotone_omega(&mut r, 4);
        for k in 1..=3 {
            let level = 4 * k + 4;
            let hankel = one_var_k_hyponormal(&omega, k, level - (2 * k + 1)).unwrap().holds;
            let op = one_var_k_hyponormal_operator(&omega, k, level).unwrap().is_psd;
            assert_eq!(hankel, op, "ω = {omega}, k = {k}");
        }
    }
}

#[test]
fn stampfli_moments_by_brute_force() {
    for (a, b, c) in [(1.0, 2.0, 3.0), (1.0, 2.0, 4.0), (2.0, 3.0, 5.0), (0.3, 0.5, 2.0)] {
        let d = StampfliData::new(a, b, c).unwrap();
        let g = |j: i32| d.rho0 * d.s0.powi(j) + d.rho1 * d.s1.powi(j);
        assert_abs_diff_eq!(g(0), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(g(1), a, epsilon = 1e-12);
        assert_abs_diff_eq!(g(2), a * b, epsilon = 1e-11);
        assert_abs_diff_eq!(g(3), a * b * c, epsilon = 1e-10);
        assert_abs_diff_eq!(d.s0 + d.s1, d.phi1, epsilon = 1e-12);
        assert_abs_diff_eq!(d.s0 * d.s1, -d.phi0, epsilon = 1e-12);
    }
    let mu = quasinormal2_measure(1.0, 2.0, 3.0).unwrap();
    assert_abs_diff_eq!(mu.atoms[0].s, 2.0 - 2f64.sqrt(), epsilon = 1e-12);
    assert_abs_diff_eq!(mu.atoms[0].t, 2.0 + 2f64.sqrt(), epsilon = 1e-12);
    assert_abs_diff_eq!(mu.atoms[0].rho, 0.853553, epsilon = 1e-6);
}

#[test]
fn crossing_point_matches_reference() {
    assert!((crossing_q() - 0.52138).abs() < 1e-4);
}

/// Bisection on the numerical spherical verdict lands on the closed-form
/// threshold derived from the transformed weights.
#[test]
fn spherical_threshold_by_bisection() {
    for y in [0.2, 0.6, 0.8] {
        let hypo = |x: f64| {
            let s = spherical_transform(&WeightDiagram::prop2(x, y).unwrap()).unwrap();
            joint_hyponormal(&s, 12).unwrap().joint
        };
        let (mut lo, mut hi) = (thresholds(y).unwrap().h, 0.999);
        assert!(hypo(lo) && !hypo(hi));
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if hypo(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_abs_diff_eq!(lo, spherical_threshold(y).unwrap(), epsilon = 1e-8);
    }
}
