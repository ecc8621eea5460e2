//! Threshold curves for the `prop2(x, y)` family and numerical cross-checks.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::diagram::WeightDiagram;
use crate::error::{Error, Result};
use crate::positivity::{joint_hyponormal, k_hyponormal, min_level};
use crate::transforms::{spherical_transform_on, toral_transform_on};

/// Distance from a curve below which numerical and closed-form verdicts are
/// not compared.
pub const BOUNDARY_MARGIN: f64 = 1e-6;

/// Number of `x` values probed per `y` in a scan.
pub const LADDER_LEN: usize = 20;

pub const DEFAULT_SCAN_LEVEL: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdCurves {
    pub y: f64,
    /// Subnormality: `√(1/(2−y²))`.
    pub s: f64,
    /// Joint hyponormality: `√((1+y²)/2)`.
    pub h: f64,
    /// Toral transform hyponormal: `(1+y)/2`.
    #[serde(rename = "CA")]
    pub ca: f64,
    /// Spherical transform hyponormal, as stated in closed form:
    /// `2(1+y²−y⁴) / ((1+√2)(1+y²)(√(1+y²)−y²))`.
    #[serde(rename = "PA")]
    pub pa: f64,
}

pub fn thresholds(y: f64) -> Result<ThresholdCurves> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::domain(format!("y = {y} must lie in (0,1)")));
    }
    let y2 = y * y;
    let r = (1.0 + y2).sqrt();
    Ok(ThresholdCurves {
        y,
        s: (1.0 / (2.0 - y2)).sqrt(),
        h: ((1.0 + y2) / 2.0).sqrt(),
        ca: (1.0 + y) / 2.0,
        pa: 2.0 * (1.0 + y2 - y2 * y2) / ((1.0 + std::f64::consts::SQRT_2) * (1.0 + y2) * (r - y2)),
    })
}

/// Largest `x` for which the spherical transform of `prop2(x, y)` passes the
/// six-point test, worked out from the transformed weights at the origin:
/// `(√(1+y²) + √2 y²) / (√2 (1+y²))`.
pub fn spherical_threshold(y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::domain(format!("y = {y} must lie in (0,1)")));
    }
    let y2 = y * y;
    Ok(((1.0 + y2).sqrt() + std::f64::consts::SQRT_2 * y2) / (std::f64::consts::SQRT_2 * (1.0 + y2)))
}

/// Root of `CA(y) = s(y)`, i.e. `(1+y)²(2−y²) = 4`, by bisection on `(0.1, 0.9)`.
pub fn crossing_q() -> f64 {
    let f = |y: f64| (1.0 + y).powi(2) * (2.0 - y * y) - 4.0;
    let (mut lo, mut hi) = (0.1, 0.9);
    debug_assert!(f(lo) < 0.0 && f(hi) > 0.0);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormVerdicts {
    pub subnormal: bool,
    pub hyponormal: bool,
    pub toral_hyponormal: bool,
    pub spherical_hyponormal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumericalVerdicts {
    pub joint_hyponormal: bool,
    pub toral_hyponormal: bool,
    pub spherical_hyponormal: bool,
    pub khypo2: bool,
    pub khypo3: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionReport {
    pub x: f64,
    pub y: f64,
    pub level: usize,
    pub curves: ThresholdCurves,
    pub closed_form: ClosedFormVerdicts,
    pub numerical: NumericalVerdicts,
    /// Whether the spherical verdict matches `x ≤ PA(y)`; `None` within the
    /// boundary margin.
    pub spherical_agrees: Option<bool>,
}

fn off_boundary(x: f64, curve: f64) -> bool {
    (x - curve).abs() >= BOUNDARY_MARGIN
}

/// Closed-form and numerical verdicts for `prop2(x, y)` at truncation level
/// `level`. Disagreements on joint or toral hyponormality away from the
/// curves are reported as internal-consistency errors; the spherical
/// comparison is recorded in `spherical_agrees`.
pub fn classify(x: f64, y: f64, level: usize) -> Result<RegionReport> {
    let curves = thresholds(y)?;
    let w = WeightDiagram::prop2(x, y)?;
    let closed_form = ClosedFormVerdicts {
        subnormal: x <= curves.s,
        hyponormal: x <= curves.h,
        toral_hyponormal: x <= curves.ca,
        spherical_hyponormal: x <= curves.pa,
    };

    let joint = joint_hyponormal(&w, level)?.joint;
    let toral = toral_transform_on(&w, level)?;
    if !toral.commuting {
        return Err(Error::internal(format!("toral transform of prop2({x}, {y}) fails to commute")));
    }
    let toral_hypo = joint_hyponormal(&toral.candidate, level)?.joint;
    let spherical = spherical_transform_on(&w, level + 1)?;
    let spherical_hypo = joint_hyponormal(&spherical, level)?.joint;
    let khypo2 = k_hyponormal(&w, 2, level.max(min_level(2)))?.is_psd;
    let khypo3 = k_hyponormal(&w, 3, level.max(min_level(3)))?.is_psd;

    if off_boundary(x, curves.h) && joint != closed_form.hyponormal {
        return Err(Error::internal(format!(
            "prop2({x}, {y}): six-point verdict {joint} but x ≤ h(y) is {}",
            closed_form.hyponormal
        )));
    }
    if off_boundary(x, curves.ca) && toral_hypo != closed_form.toral_hyponormal {
        return Err(Error::internal(format!(
            "prop2({x}, {y}): toral verdict {toral_hypo} but x ≤ CA(y) is {}",
            closed_form.toral_hyponormal
        )));
    }
    let spherical_agrees = off_boundary(x, curves.pa).then_some(spherical_hypo == closed_form.spherical_hyponormal);

    Ok(RegionReport {
        x,
        y,
        level,
        curves,
        closed_form,
        numerical: NumericalVerdicts {
            joint_hyponormal: joint,
            toral_hyponormal: toral_hypo,
            spherical_hyponormal: spherical_hypo,
            khypo2,
            khypo3,
        },
        spherical_agrees,
    })
}

/// `x_j = (j + ½)/LADDER_LEN`, each moved to at least `2·BOUNDARY_MARGIN`
/// from every curve (stepping past by `3·BOUNDARY_MARGIN`, so rounding in
/// `curve + step − curve` cannot land back inside the band).
pub fn probe_ladder(c: &ThresholdCurves) -> Vec<f64> {
    let curves = [c.s, c.h, c.ca, c.pa];
    (0..LADDER_LEN)
        .map(|j| {
            let mut x = (j as f64 + 0.5) / LADDER_LEN as f64;
            while let Some(curve) = curves.iter().find(|v| (x - **v).abs() < 2.0 * BOUNDARY_MARGIN) {
                x = curve + 3.0 * BOUNDARY_MARGIN;
            }
            x
        })
        .collect()
}

/// `y_i = i/(grid+1)` for `i = 1..=grid`.
pub fn scan_ys(grid: usize) -> Vec<f64> {
    (1..=grid).map(|i| i as f64 / (grid + 1) as f64).collect()
}

/// Classifies the probe ladder on every scan row. Rows are computed in
/// parallel and returned in `y` order.
pub fn region_scan_reports(grid: usize, level: usize) -> Result<Vec<RegionReport>> {
    if grid < 2 {
        return Err(Error::domain(format!("grid {grid} must be at least 2")));
    }
    let rows: Vec<Result<Vec<RegionReport>>> = scan_ys(grid)
        .into_par_iter()
        .map(|y| {
            let c = thresholds(y)?;
            probe_ladder(&c).into_iter().map(|x| classify(x, y, level)).collect()
        })
        .collect();
    Ok(rows.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect())
}

pub const CSV_HEADER: [&str; 11] =
    ["y", "s", "h", "CA", "PA", "x", "joint_hypo", "toral_hypo", "spherical_hypo", "khypo2", "khypo3"];

/// Decimal with 12 significant digits.
pub fn sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let decimals = (11 - v.abs().log10().floor() as i64).max(0) as usize;
    format!("{v:.decimals$}")
}

pub fn write_scan_csv<W: Write>(reports: &[RegionReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in reports {
        let c = &r.curves;
        let n = &r.numerical;
        let b = |v: bool| v.to_string();
        w.write_record([
            sig12(c.y),
            sig12(c.s),
            sig12(c.h),
            sig12(c.ca),
            sig12(c.pa),
            sig12(r.x),
            b(n.joint_hyponormal),
            b(n.toral_hyponormal),
            b(n.spherical_hyponormal),
            b(n.khypo2),
            b(n.khypo3),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the scan and writes the CSV to `out`.
pub fn region_scan(grid: usize, level: usize, out: &Path) -> Result<Vec<RegionReport>> {
    let reports = region_scan_reports(grid, level)?;
    write_scan_csv(&reports, File::create(out)?)?;
    Ok(reports)
}
