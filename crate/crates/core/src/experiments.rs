//! The twelve reproduction experiments. Each returns an [`Outcome`] with a
//! verdict and a few human-readable lines; thresholds are the constants
//! below.

use std::time::{Duration, Instant};

use rand::Rng;
use serde::Serialize;

use crate::diagram::{WeightDiagram, WEIGHT_TOL};
use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::measures::{
    berger_atomic_verify, gram_diagonal_constant, is_spherically_quasinormal, qt_power_identity_check,
    quasinormal2_measure, quasinormal_completion, StampfliData,
};
use crate::onevar::OneVarWeights;
use crate::positivity::{componentwise_hyponormal, joint_hyponormal, k_hyponormal, one_var_k_hyponormal};
use crate::regions::{classify, crossing_q, region_scan_reports, spherical_threshold, thresholds};
use crate::sampling::{
    commuting_table, random_abc, random_commuting_table, random_measure, random_monotone_diagram,
    random_monotone_omega, rng,
};
use crate::transforms::{
    continuity_probe, spherical_transform_on, toral_commutativity_test, toral_transform_on,
    transform_distance, TransformKind,
};

pub const Q_REFERENCE: f64 = 0.52138;
pub const Q_TOL: f64 = 1e-4;
pub const Q_BUDGET: Duration = Duration::from_secs(1);
pub const SCAN_GRID: usize = 9;
pub const SCAN_LEVEL: usize = 12;
pub const SCAN_BUDGET: Duration = Duration::from_secs(30);
pub const KHYPO_LEVEL: usize = 14;
pub const TRANSFORM_WINDOW: usize = 12;
pub const COINCIDE_TOL: f64 = 1e-12;
pub const DIFFER_TOL: f64 = 1e-6;
pub const BERGER_TOL: f64 = 1e-10;
pub const QT_TOL: f64 = 1e-10;
pub const QT_NMAX: usize = 5;
pub const QT_LEVEL: usize = 12;
pub const QUASINORMAL_WINDOW: usize = 10;
pub const RE4_LEVEL: usize = 10;
pub const RE4_SLACK: f64 = 1e-10;
pub const RE4_NS: [u32; 4] = [1, 10, 100, 10_000];
pub const CONTINUITY_DELTAS: [f64; 3] = [1e-2, 1e-3, 1e-4];
pub const CONTINUITY_LIMIT: f64 = 1e-2;

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub lines: Vec<String>,
    pub elapsed_ms: u128,
}

pub const NAMES: [(u8, &str); 12] = [
    (1, "crossing point q"),
    (2, "prop2 region agreement (ii)-(iv)"),
    (3, "prop2 counterexample points"),
    (4, "prop2 subnormal region is 3-hyponormal"),
    (5, "transform commutativity and monotonicity"),
    (6, "theta lift preserves k-hyponormality"),
    (7, "hyponormal theta lifts: transforms coincide"),
    (8, "toral = spherical exactly on the thm1 class"),
    (9, "spherical quasinormality equivalences"),
    (10, "quasinormal completion Berger measures"),
    (11, "quasinormal completions are 3-hyponormal"),
    (12, "regularization bounds and continuity"),
];

/// `reproduce` target names and the criterion each maps to.
pub const TARGETS: [(&str, u8); 12] = [
    ("crossing", 1),
    ("prop2", 2),
    ("prop2-points", 3),
    ("prop2-subnormal", 4),
    ("prop1", 5),
    ("propscaling2", 6),
    ("prehypo", 7),
    ("thm1", 8),
    ("quasinormal3", 9),
    ("quasinormal2", 10),
    ("quasub", 11),
    ("re4", 12),
];

pub fn target_id(name: &str) -> Option<u8> {
    TARGETS.iter().find(|(n, _)| *n == name).map(|(_, id)| *id)
}

struct Log {
    lines: Vec<String>,
    ok: bool,
}

impl Log {
    fn new() -> Self {
        Log { lines: Vec::new(), ok: true }
    }

    fn note(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    fn check(&mut self, ok: bool, line: impl Into<String>) {
        let line = line.into();
        self.lines.push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
        self.ok &= ok;
    }
}

/// Runs criterion `id` with the given seed.
pub fn run(id: u8, seed: u64) -> Result<Outcome> {
    let start = Instant::now();
    let name = NAMES
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, n)| *n)
        .ok_or_else(|| Error::domain(format!("no criterion {id}")))?;
    let mut log = Log::new();
    let sub = seed ^ (id as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    match id {
        1 => crossing(&mut log),
        2 => prop2_agreement(&mut log),
        3 => prop2_points(&mut log),
        4 => prop2_subnormal(&mut log, sub),
        5 => prop1(&mut log, sub),
        6 => propscaling2(&mut log, sub),
        7 => prehypo(&mut log, sub),
        8 => thm1_class(&mut log, sub),
        9 => quasinormal3(&mut log, sub),
        10 => quasinormal2(&mut log),
        11 => quasub(&mut log, sub),
        _ => re4(&mut log, sub),
    }?;
    let elapsed = start.elapsed();
    match id {
        1 => log.check(elapsed < Q_BUDGET, format!("runtime {elapsed:?} < {Q_BUDGET:?}")),
        2 => log.check(elapsed < SCAN_BUDGET, format!("runtime {elapsed:?} < {SCAN_BUDGET:?}")),
        _ => {}
    }
    Ok(Outcome { id, name, passed: log.ok, lines: log.lines, elapsed_ms: elapsed.as_millis() })
}

fn crossing(log: &mut Log) -> Result<()> {
    let q = crossing_q();
    log.check((q - Q_REFERENCE).abs() <= Q_TOL, format!("q = {q:.10} (reference {Q_REFERENCE} ± {Q_TOL})"));
    let below = thresholds(0.4)?;
    let above = thresholds(0.7)?;
    log.check(below.ca < below.s && above.ca > above.s, "CA < s at y = 0.4, CA > s at y = 0.7");
    Ok(())
}

fn prop2_agreement(log: &mut Log) -> Result<()> {
    log.note(format!("q = {:.10}", crossing_q()));
    let reports = region_scan_reports(SCAN_GRID, SCAN_LEVEL)?;
    let total = reports.len();
    let joint = reports.iter().filter(|r| r.numerical.joint_hyponormal == r.closed_form.hyponormal).count();
    let toral = reports
        .iter()
        .filter(|r| r.numerical.toral_hyponormal == r.closed_form.toral_hyponormal)
        .count();
    let spherical = reports.iter().filter(|r| r.spherical_agrees == Some(true)).count();
    log.check(joint == total, format!("(ii)  joint vs x ≤ h(y):      {joint}/{total}"));
    log.check(toral == total, format!("(iii) toral vs x ≤ CA(y):     {toral}/{total}"));
    log.check(spherical == total, format!("(iv)  spherical vs x ≤ PA(y): {spherical}/{total}"));
    for r in reports.iter().filter(|r| r.spherical_agrees == Some(false)) {
        log.note(format!(
            "      y = {:.1}, x = {:.3}: spherical transform hyponormal = {}, PA = {:.6}, observed threshold = {:.6}",
            r.y,
            r.x,
            r.numerical.spherical_hyponormal,
            r.curves.pa,
            spherical_threshold(r.y)?
        ));
    }
    Ok(())
}

fn prop2_points(log: &mut Log) -> Result<()> {
    let a = classify(0.72, 0.4, SCAN_LEVEL)?;
    log.check(
        a.numerical.joint_hyponormal && !a.numerical.toral_hyponormal,
        format!(
            "(0.72, 0.4): W hyponormal = {}, toral transform hyponormal = {}",
            a.numerical.joint_hyponormal, a.numerical.toral_hyponormal
        ),
    );
    let b = classify(0.84, 0.6, SCAN_LEVEL)?;
    log.check(
        !b.numerical.joint_hyponormal && b.numerical.spherical_hyponormal,
        format!(
            "(0.84, 0.6): W hyponormal = {}, spherical transform hyponormal = {}",
            b.numerical.joint_hyponormal, b.numerical.spherical_hyponormal
        ),
    );
    Ok(())
}

fn prop2_subnormal(log: &mut Log, seed: u64) -> Result<()> {
    let mut r = rng(seed);
    let mut passed = 0;
    for _ in 0..20 {
        let y = r.random_range(0.05..0.95);
        let x = r.random_range(0.02..thresholds(y)?.s);
        let w = WeightDiagram::prop2(x, y)?;
        let mut ok = true;
        for k in 1..=3 {
            ok &= k_hyponormal(&w, k, KHYPO_LEVEL)?.is_psd;
        }
        if ok {
            passed += 1;
        } else {
            log.note(format!("      ({x:.6}, {y:.6}) fails"));
        }
    }
    log.check(passed == 20, format!("k = 1,2,3 at N = {KHYPO_LEVEL}: {passed}/20 samples with x ≤ s(y)"));
    Ok(())
}

/// Product table `α_k = f(k1)`, `β_k = g(k2)`: commuting, and its toral
/// candidate commutes.
fn product_table<R: Rng>(r: &mut R) -> Result<WeightDiagram> {
    let n = r.random_range(3..=6);
    let f: Vec<f64> = (0..n).map(|_| r.random_range(0.5..1.5)).collect();
    let g: Vec<f64> = (0..n).map(|_| r.random_range(0.5..1.5)).collect();
    WeightDiagram::table((0..n).map(|_| f.clone()).collect(), (0..n).map(|k2| vec![g[k2]; n]).collect())
}

fn prop1(log: &mut Log, seed: u64) -> Result<()> {
    let mut r = rng(seed);
    let (mut worst, mut agree, mut commuting) = (0.0f64, 0, 0);
    for i in 0..50 {
        let w = if i % 5 == 0 {
            product_table(&mut r)?
        } else {
            let size = r.random_range(3..=6);
            random_commuting_table(&mut r, size, 0.5, 1.5)?
        };
        let s = spherical_transform_on(&w, TRANSFORM_WINDOW)?;
        worst = worst.max(s.commutativity_residual(TRANSFORM_WINDOW).0);
        let t = toral_commutativity_test(&w, TRANSFORM_WINDOW)?;
        agree += usize::from(t.agrees());
        commuting += usize::from(t.commutes);
    }
    log.check(worst <= WEIGHT_TOL, format!("spherical transforms commute: worst residual {worst:.2e} over 50 tables"));
    log.check(
        agree == 50,
        format!("toral condition vs candidate residual agree: {agree}/50 ({commuting} commuting)"),
    );

    let mut preserved = 0;
    for _ in 0..50 {
        let w = random_monotone_diagram(&mut r)?;
        let s = spherical_transform_on(&w, TRANSFORM_WINDOW)?;
        if componentwise_hyponormal(&w, TRANSFORM_WINDOW) == (true, true)
            && componentwise_hyponormal(&s, TRANSFORM_WINDOW) == (true, true)
        {
            preserved += 1;
        }
    }
    log.check(preserved == 50, format!("componentwise hyponormality preserved: {preserved}/50"));
    Ok(())
}

fn propscaling2(log: &mut Log, seed: u64) -> Result<()> {
    let mut r = rng(seed);
    let (mut agree, mut total, mut positive) = (0, 0, 0);
    for _ in 0..20 {
        let omega = random_monotone_omega(&mut r, 4);
        let theta = WeightDiagram::theta(omega.clone())?;
        for k in 1..=3 {
            let level = 4 * k + 4;
            let one = one_var_k_hyponormal(&omega, k, level - (2 * k + 1))?.holds;
            let two = k_hyponormal(&theta, k, level)?.is_psd;
            total += 1;
            positive += usize::from(one);
            if one == two {
                agree += 1;
            } else {
                log.note(format!("      k = {k}, ω = {omega}: one-variable {one}, lifted {two}"));
            }
        }
    }
    log.check(agree == total, format!("one-variable vs lifted verdicts agree: {agree}/{total} ({positive} k-hyponormal)"));
    Ok(())
}

fn prehypo(log: &mut Log, seed: u64) -> Result<()> {
    let mut r = rng(seed);
    let (mut found, mut coincide, mut hypo) = (0, 0, 0);
    let mut worst = 0.0f64;
    for _ in 0..400 {
        if found == 20 {
            break;
        }
        let w = WeightDiagram::theta(random_monotone_omega(&mut r, 6))?;
        if !joint_hyponormal(&w, TRANSFORM_WINDOW)?.joint {
            continue;
        }
        found += 1;
        let t = toral_transform_on(&w, TRANSFORM_WINDOW)?.candidate;
        let s = spherical_transform_on(&w, TRANSFORM_WINDOW + 1)?;
        let d = t.max_weight_deviation(&s, TRANSFORM_WINDOW);
        worst = worst.max(d);
        coincide += usize::from(d <= COINCIDE_TOL);
        hypo += usize::from(
            joint_hyponormal(&t, TRANSFORM_WINDOW)?.joint && joint_hyponormal(&s, TRANSFORM_WINDOW)?.joint,
        );
    }
    log.check(found == 20, format!("hyponormal theta lifts sampled: {found}/20"));
    log.check(coincide == found, format!("toral = spherical: {coincide}/{found} (worst {worst:.2e})"));
    log.check(hypo == found, format!("both transforms hyponormal: {hypo}/{found}"));
    Ok(())
}

fn thm1_class(log: &mut Log, seed: u64) -> Result<()> {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let omega = if r.random_bool(0.5) {
            random_monotone_omega(&mut r, 6)
        } else {
            let len = r.random_range(2..=6);
            OneVarWeights::table((0..len).map(|_| r.random_range(0.3..1.7)).collect())?
        };
        let w = WeightDiagram::thm1(omega, r.random_range(0.2..2.0))?;
        let t = toral_transform_on(&w, TRANSFORM_WINDOW)?.candidate;
        let s = spherical_transform_on(&w, TRANSFORM_WINDOW + 1)?;
        worst = worst.max(t.max_weight_deviation(&s, TRANSFORM_WINDOW));
    }
    log.check(worst <= COINCIDE_TOL, format!("thm1 instances: worst |toral − spherical| = {worst:.2e}"));

    // Perturb one β of a thm1 diagram and rebuild α to restore commutativity.
    const R: usize = 6;
    let mut least = f64::INFINITY;
    for _ in 0..20 {
        let len = r.random_range(2..=3);
        let omega = OneVarWeights::table((0..len).map(|_| r.random_range(0.3..1.7)).collect())?;
        let base = WeightDiagram::thm1(omega, r.random_range(0.2..2.0))?;
        let t = base.tabulate(R);
        let mut beta = t.beta.clone();
        let (k1, k2) = (r.random_range(0..=R), r.random_range(0..R));
        beta[k2][k1] *= 1.0 + r.random_range(0.05..0.2);
        let w = commuting_table(&t.alpha[0], beta)?;
        let tor = toral_transform_on(&w, TRANSFORM_WINDOW)?.candidate;
        let sph = spherical_transform_on(&w, TRANSFORM_WINDOW + 1)?;
        least = least.min(tor.max_weight_deviation(&sph, TRANSFORM_WINDOW));
    }
    log.check(least > DIFFER_TOL, format!("perturbed instances: smallest max |toral − spherical| = {least:.2e}"));
    Ok(())
}

/// 25 completions from random rows and constants.
fn completions(seed: u64) -> Result<Vec<WeightDiagram>> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    while out.len() < 25 {
        let (row, sup) = match out.len() % 3 {
            0 => {
                let (a, b, c) = random_abc(&mut r);
                let d = StampfliData::new(a, b, c)?;
                if out.len() % 2 == 0 {
                    out.push(quasinormal_completion(d.weights(), d.phi1)?);
                    continue;
                }
                (d.weights(), d.s1)
            }
            1 => {
                let m = random_measure(&mut r, 0.2, 2.0);
                let sup = m.atoms.iter().map(|a| a.s).fold(0.0, f64::max);
                (OneVarWeights::from_measure(m), sup)
            }
            _ => {
                let v = r.random_range(0.3..1.5);
                (OneVarWeights::constant(v)?, v * v)
            }
        };
        let c = sup * r.random_range(1.05..2.0);
        out.push(quasinormal_completion(row, c)?);
    }
    Ok(out)
}

fn quasinormal3(log: &mut Log, seed: u64) -> Result<()> {
    let mut r = rng(seed ^ 1);
    let mut diagrams: Vec<(WeightDiagram, bool)> = completions(seed)?.into_iter().map(|w| (w, true)).collect();
    for _ in 0..25 {
        let size = r.random_range(3..=6);
        diagrams.push((random_commuting_table(&mut r, size, 0.5, 1.5)?, false));
    }
    let (mut agree, mut expected) = (0, 0);
    for (w, is_completion) in &diagrams {
        let flags = match is_spherically_quasinormal(w, QUASINORMAL_WINDOW) {
            Ok(v) => Some((v.fixed_point, v.quasinormal)),
            Err(Error::InternalConsistency(msg)) => {
                log.note(format!("      {msg}"));
                None
            }
            Err(e) => return Err(e),
        };
        let gram = gram_diagonal_constant(w, QUASINORMAL_WINDOW)?.0;
        if let Some((fixed, constant)) = flags {
            if fixed == constant && constant == gram {
                agree += 1;
                expected += usize::from(constant == *is_completion);
            }
        }
    }
    let n = diagrams.len();
    log.check(agree == n, format!("fixed point ⟺ constant C ⟺ constant Gram diagonal: {agree}/{n}"));
    log.check(expected == n, format!("completions flagged quasinormal, generic tables not: {expected}/{n}"));
    Ok(())
}

fn quasinormal2(log: &mut Log) -> Result<()> {
    for (a, b, c) in [(1.0, 2.0, 3.0), (1.0, 2.0, 4.0), (2.0, 3.0, 5.0)] {
        let d = StampfliData::new(a, b, c)?;
        let w = quasinormal_completion(d.weights(), d.phi1)?;
        let err = berger_atomic_verify(&w, &quasinormal2_measure(a, b, c)?, 10)?;
        log.check(err <= BERGER_TOL, format!("({a}, {b}, {c}), C = {}: moment error {err:.2e}", d.phi1));
        if (a, b, c) == (1.0, 2.0, 3.0) {
            let b00 = w.beta(LatticePoint::ORIGIN);
            let a01 = w.alpha(LatticePoint::new(0, 1));
            log.check(
                (b00 - 3f64.sqrt()).abs() <= 1e-12 && (a01 - (2.0f64 / 3.0).sqrt()).abs() <= 1e-12,
                format!("β_(0,0) = {b00:.12}, α_(0,1) = {a01:.12}"),
            );
        }
    }
    Ok(())
}

fn quasub(log: &mut Log, seed: u64) -> Result<()> {
    let (mut khypo, mut worst_qt) = (0, 0.0f64);
    let all = completions(seed)?;
    for w in &all {
        let mut ok = true;
        for k in 1..=3 {
            ok &= k_hyponormal(w, k, KHYPO_LEVEL)?.is_psd;
        }
        khypo += usize::from(ok);
        worst_qt = worst_qt.max(qt_power_identity_check(w, QT_NMAX, QT_LEVEL)?);
    }
    let n = all.len();
    log.check(khypo == n, format!("k = 1,2,3 at N = {KHYPO_LEVEL}: {khypo}/{n} completions"));
    log.check(worst_qt <= QT_TOL, format!("Q_T power identity, n ≤ {QT_NMAX}: worst residual {worst_qt:.2e}"));
    Ok(())
}

fn re4(log: &mut Log, seed: u64) -> Result<()> {
    let mut r = rng(seed);
    let mut min_slack = f64::INFINITY;
    let mut worst_name = "";
    for i in 0..10 {
        let w = match i % 3 {
            0 => {
                let size = r.random_range(3..=6);
                random_commuting_table(&mut r, size, 0.2, 2.0)?
            }
            1 => random_monotone_diagram(&mut r)?,
            _ => WeightDiagram::prop2(r.random_range(0.05..0.95), r.random_range(0.05..0.95))?,
        };
        for n in RE4_NS {
            let probe = continuity_probe(&w, RE4_LEVEL, n)?;
            for (name, b) in probe.bounds.named() {
                if b.slack() < min_slack {
                    min_slack = b.slack();
                    worst_name = name;
                }
            }
        }
    }
    log.check(
        min_slack >= -RE4_SLACK,
        format!("bounds (i)-(v), n ∈ {RE4_NS:?}, N = {RE4_LEVEL}: least slack {min_slack:.3e} in ({worst_name})"),
    );

    let w = WeightDiagram::prop2(0.5, 0.5)?;
    let mut dists = Vec::new();
    for delta in CONTINUITY_DELTAS {
        let v = WeightDiagram::prop2(0.5 + delta, 0.5)?;
        dists.push(transform_distance(&w, &v, TransformKind::Spherical, RE4_LEVEL)?);
    }
    let decreasing = dists.windows(2).all(|p| p[1] < p[0]);
    let last = *dists.last().expect("three deltas");
    log.check(
        decreasing && last < CONTINUITY_LIMIT,
        format!(
            "spherical distances for δ = {CONTINUITY_DELTAS:?}: {}",
            dists.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    );
    Ok(())
}
