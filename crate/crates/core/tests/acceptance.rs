//! One test per acceptance criterion; each prints a single pass/fail line
//! followed by its measurements.

use aluthge_lab::experiments::{self, Outcome};
use aluthge_lab::sampling::DEFAULT_SEED;

fn report(id: u8) -> Outcome {
    let outcome = experiments::run(id, DEFAULT_SEED).unwrap_or_else(|e| panic!("criterion {id} errored: {e}"));
    let mark = if outcome.passed { "PASS" } else { "FAIL" };
    println!("\n[{mark}] criterion {:>2}: {} ({} ms)", id, outcome.name, outcome.elapsed_ms);
    for line in &outcome.lines {
        println!("        {line}");
    }
    outcome
}

macro_rules! criterion {
    ($name:ident, $id:expr) => {
        #[test]
        fn $name() {
            let outcome = report($id);
            assert!(outcome.passed, "criterion {} failed:\n{}", $id, outcome.lines.join("\n"));
        }
    };
}

criterion!(c01_crossing_point, 1);
criterion!(c02_region_agreement, 2);
criterion!(c03_counterexample_points, 3);
criterion!(c04_subnormal_region_k_hyponormal, 4);
criterion!(c05_transform_commutativity, 5);
criterion!(c06_theta_lift_k_hyponormality, 6);
criterion!(c07_hyponormal_theta_transforms, 7);
criterion!(c08_thm1_equality_class, 8);
criterion!(c09_quasinormal_equivalences, 9);
criterion!(c10_completion_berger_measures, 10);
criterion!(c11_completions_k_hyponormal, 11);
criterion!(c12_regularization_and_continuity, 12);
