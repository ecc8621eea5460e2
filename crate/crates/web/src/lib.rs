//! wasm-bindgen bindings for the static demo page in `www/`.
//!
//! Every export returns a JSON string. The `*_json` functions hold the logic
//! and are plain Rust, so they can be tested natively; the exported wrappers
//! only convert errors into JavaScript exceptions.

use aluthge_lab::diagram::WeightDiagram;
use aluthge_lab::measures::StampfliData;
use aluthge_lab::positivity::joint_hyponormal;
use aluthge_lab::regions::{self, spherical_threshold, thresholds};
use aluthge_lab::transforms::{spherical_transform_on, toral_transform_on};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest map the page may request per side.
pub const MAX_MAP_SIDE: usize = 80;

type Out = Result<String, String>;

fn to_json<T: Serialize>(v: &T) -> Out {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Curves {
    #[serde(flatten)]
    curves: regions::ThresholdCurves,
    spherical_numeric: f64,
}

pub fn thresholds_json(y: f64) -> Out {
    let curves = thresholds(y).map_err(|e| e.to_string())?;
    let spherical_numeric = spherical_threshold(y).map_err(|e| e.to_string())?;
    to_json(&Curves { curves, spherical_numeric })
}

#[derive(Serialize)]
struct Cell {
    /// Joint hyponormality of the diagram itself.
    w: bool,
    toral: bool,
    spherical: bool,
}

#[derive(Serialize)]
struct RegionMap {
    n: usize,
    level: usize,
    /// Row-major, `y` increasing with the row index, `x` with the column.
    xs: Vec<f64>,
    ys: Vec<f64>,
    cells: Vec<Cell>,
}

/// Six-point verdicts for the family on an `n × n` grid of cell centres in
/// `(0,1)²`, at truncation level `level`.
pub fn region_map_json(n: usize, level: usize) -> Out {
    if !(2..=MAX_MAP_SIDE).contains(&n) {
        return Err(format!("grid side must lie in 2..={MAX_MAP_SIDE}"));
    }
    if !(3..=16).contains(&level) {
        return Err("level must lie in 3..=16".into());
    }
    let axis: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    let mut cells = Vec::with_capacity(n * n);
    for &y in &axis {
        for &x in &axis {
            cells.push(cell(x, y, level).map_err(|e| e.to_string())?);
        }
    }
    to_json(&RegionMap { n, level, xs: axis.clone(), ys: axis, cells })
}

fn cell(x: f64, y: f64, level: usize) -> aluthge_lab::Result<Cell> {
    let w = WeightDiagram::prop2(x, y)?;
    let toral = toral_transform_on(&w, level)?.candidate;
    let spherical = spherical_transform_on(&w, level + 1)?;
    Ok(Cell {
        w: joint_hyponormal(&w, level)?.joint,
        toral: joint_hyponormal(&toral, level)?.joint,
        spherical: joint_hyponormal(&spherical, level)?.joint,
    })
}

#[derive(Serialize)]
struct Weights {
    x: f64,
    y: f64,
    size: usize,
    /// `alpha[k2][k1]`
    alpha: Vec<Vec<f64>>,
    beta: Vec<Vec<f64>>,
    spherical_alpha: Vec<Vec<f64>>,
    spherical_beta: Vec<Vec<f64>>,
}

/// Weights of the family member and of its spherical transform on `[0, size]²`.
pub fn spherical_weights_json(x: f64, y: f64, size: usize) -> Out {
    if size > 12 {
        return Err("size must be at most 12".into());
    }
    let w = WeightDiagram::prop2(x, y).map_err(|e| e.to_string())?;
    let s = spherical_transform_on(&w, size + 1).map_err(|e| e.to_string())?;
    let (a, b) = (w.tabulate(size), s.tabulate(size));
    to_json(&Weights { x, y, size, alpha: a.alpha, beta: a.beta, spherical_alpha: b.alpha, spherical_beta: b.beta })
}

pub fn stampfli_json(a: f64, b: f64, c: f64) -> Out {
    to_json(&StampfliData::new(a, b, c).map_err(|e| e.to_string())?)
}

fn js(r: Out) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn curves(y: f64) -> Result<String, JsValue> {
    js(thresholds_json(y))
}

#[wasm_bindgen]
pub fn region_map(n: usize, level: usize) -> Result<String, JsValue> {
    js(region_map_json(n, level))
}

#[wasm_bindgen]
pub fn spherical_weights(x: f64, y: f64, size: usize) -> Result<String, JsValue> {
    js(spherical_weights_json(x, y, size))
}

#[wasm_bindgen]
pub fn stampfli(a: f64, b: f64, c: f64) -> Result<String, JsValue> {
    js(stampfli_json(a, b, c))
}
