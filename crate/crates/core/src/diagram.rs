//! Weight diagrams of 2-variable weighted shifts `W_(α,β) ≡ (T₁, T₂)`.
//!
//! `T₁ e_k = α_k e_{k+ε₁}` and `T₂ e_k = β_k e_{k+ε₂}` on the lattice basis of
//! `ℓ²(Z₊²)`. A [`WeightDiagram`] evaluates `α` and `β` at any lattice point;
//! closed-form families are exact everywhere, tables extend flatly past their
//! stored rectangle, and derived diagrams (core, transforms, scalings) are
//! evaluated lazily from their source.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::onevar::{AtomicMeasure1, OneVarWeights};

/// Absolute tolerance on weight-level identities (commutativity residuals,
/// weight comparisons).
pub const WEIGHT_TOL: f64 = 1e-12;

/// Default truncation level for checks that need one.
pub const DEFAULT_LEVEL: usize = 12;

/// Default validation window for quasinormal completions.
pub const DEFAULT_COMPLETION_WINDOW: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagramKind {
    Table,
    Theta,
    Prop2,
    Thm1,
    QuasinormalCompletion,
    Core,
    ToralTransform,
    SphericalTransform,
    Scaled,
}

impl DiagramKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagramKind::Table => "table",
            DiagramKind::Theta => "theta",
            DiagramKind::Prop2 => "prop2",
            DiagramKind::Thm1 => "thm1",
            DiagramKind::QuasinormalCompletion => "quasinormal-completion",
            DiagramKind::Core => "core",
            DiagramKind::ToralTransform => "toral-transform",
            DiagramKind::SphericalTransform => "spherical-transform",
            DiagramKind::Scaled => "scaled",
        }
    }
}

/// Stored rectangle of weights; `alpha[k2][k1]`, flat tail outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableWeights {
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
    pub rows: usize,
    pub cols: usize,
}

impl TableWeights {
    fn at(grid: &[Vec<f64>], rows: usize, cols: usize, k: LatticePoint) -> f64 {
        grid[k.k2.min(rows - 1)][k.k1.min(cols - 1)]
    }

    fn alpha(&self, k: LatticePoint) -> f64 {
        Self::at(&self.alpha, self.rows, self.cols, k)
    }

    fn beta(&self, k: LatticePoint) -> f64 {
        Self::at(&self.beta, self.rows, self.cols, k)
    }
}

#[derive(Debug)]
enum Source {
    Table(TableWeights),
    Theta(OneVarWeights),
    Prop2 { x: f64, y: f64 },
    Thm1 { omega: OneVarWeights, y: f64 },
    Completion { row: OneVarWeights, constant: f64, window: usize },
    Core(WeightDiagram),
    Toral(WeightDiagram),
    Spherical(WeightDiagram),
    Scaled(WeightDiagram, f64),
}

/// Immutable, cheaply clonable weight diagram.
#[derive(Debug, Clone)]
pub struct WeightDiagram {
    source: Arc<Source>,
}

impl WeightDiagram {
    fn from_source(source: Source) -> Self {
        WeightDiagram { source: Arc::new(source) }
    }

    pub fn kind(&self) -> DiagramKind {
        match &*self.source {
            Source::Table(_) => DiagramKind::Table,
            Source::Theta(_) => DiagramKind::Theta,
            Source::Prop2 { .. } => DiagramKind::Prop2,
            Source::Thm1 { .. } => DiagramKind::Thm1,
            Source::Completion { .. } => DiagramKind::QuasinormalCompletion,
            Source::Core(_) => DiagramKind::Core,
            Source::Toral(_) => DiagramKind::ToralTransform,
            Source::Spherical(_) => DiagramKind::SphericalTransform,
            Source::Scaled(..) => DiagramKind::Scaled,
        }
    }

    // ----------------------------------------------------------------- builders

    /// Θ-lift: `α_k = β_k = ω_{k1+k2}`.
    pub fn theta(omega: OneVarWeights) -> Result<Self> {
        omega.validate(2 * DEFAULT_LEVEL + 4)?;
        Ok(Self::from_source(Source::Theta(omega)))
    }

    /// The family with `α_(0,0) = β_(0,0) = x`, `α_(0,k2) = β_(k1,0) = y` for
    /// `k1, k2 ≥ 1`, and every other weight equal to 1.
    pub fn prop2(x: f64, y: f64) -> Result<Self> {
        for (name, v) in [("x", x), ("y", y)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::domain(format!("{name} = {v} must lie in (0,1)")));
            }
        }
        Ok(Self::from_source(Source::Prop2 { x, y }))
    }

    /// `α_k = ω_{k1+k2}`, `β_k = (y/ω₀) ω_{k1+k2}`.
    pub fn thm1(omega: OneVarWeights, y: f64) -> Result<Self> {
        if !(y > 0.0 && y.is_finite()) {
            return Err(Error::InvalidWeights(format!("y = {y} must be positive")));
        }
        omega.validate(2 * DEFAULT_LEVEL + 4)?;
        Ok(Self::from_source(Source::Thm1 { omega, y }))
    }

    /// Table with flat tail. Commutativity is verified on `[0, cols] × [0, rows]`,
    /// which covers every configuration the flat extension can produce.
    pub fn table(alpha: Vec<Vec<f64>>, beta: Vec<Vec<f64>>) -> Result<Self> {
        let rows = alpha.len();
        let cols = alpha.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::Shape("empty weight table".into()));
        }
        if beta.len() != rows
            || alpha.iter().chain(beta.iter()).any(|r| r.len() != cols)
        {
            return Err(Error::Shape(format!("alpha and beta must both be {rows}×{cols}")));
        }
        if let Some(bad) = alpha.iter().chain(beta.iter()).flatten().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidWeights(format!("table weight {bad} is not positive")));
        }
        let w = Self::from_source(Source::Table(TableWeights { alpha, beta, rows, cols }));
        let (residual, at) = w.commutativity_residual_on(cols, rows);
        if residual > WEIGHT_TOL {
            return Err(Error::NonCommuting { at, residual });
        }
        Ok(w)
    }

    /// Table without the commutativity check.
    #[cfg(test)]
    pub(crate) fn table_unchecked(t: TableWeights) -> Self {
        Self::from_source(Source::Table(t))
    }

    /// Spherically quasinormal diagram determined by its zero-th row:
    /// `α_(k1,0) = ω_{k1}`, `β_k = √(C − α_k²)` and
    /// `α_{k+ε₂} = α_k β_{k+ε₁} / β_k`.
    ///
    /// Feasibility (`C − α_k² > 0`) is checked on `[0, window]²`.
    pub fn quasinormal_completion(row: OneVarWeights, constant: f64, window: usize) -> Result<Self> {
        if !(constant > 0.0 && constant.is_finite()) {
            return Err(Error::InfeasibleConstant { constant, detail: "must be positive".into() });
        }
        let sup = row.validate(2 * window + 1)?;
        if constant <= sup * sup {
            return Err(Error::InfeasibleConstant {
                constant,
                detail: format!("does not exceed sup ω_j² = {}", sup * sup),
            });
        }
        let grid = completion_grid(&row, constant, window);
        for (k2, line) in grid.iter().enumerate() {
            for (k1, a) in line.iter().enumerate().take(window + 1) {
                if !(constant - a * a > 0.0) || !a.is_finite() {
                    return Err(Error::InfeasibleConstant {
                        constant,
                        detail: format!("C − α² = {} at ({k1},{k2})", constant - a * a),
                    });
                }
            }
        }
        Ok(Self::from_source(Source::Completion { row, constant, window }))
    }

    /// Restriction to the span of `{e_k : k1 ≥ 1, k2 ≥ 1}`, re-indexed to start at the origin.
    pub fn core_of(&self) -> Self {
        Self::from_source(Source::Core(self.clone()))
    }

    /// Weights `c·α`, `c·β`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidWeights(format!("scale factor {factor} must be positive")));
        }
        Ok(Self::from_source(Source::Scaled(self.clone(), factor)))
    }

    pub(crate) fn toral_of(&self) -> Self {
        Self::from_source(Source::Toral(self.clone()))
    }

    pub(crate) fn spherical_of(&self) -> Self {
        Self::from_source(Source::Spherical(self.clone()))
    }

    /// Constant-1 diagram (the unweighted pair of unilateral shifts).
    pub fn flat() -> Self {
        Self::from_source(Source::Theta(OneVarWeights::Constant { value: 1.0 }))
    }

    // --------------------------------------------------------------- evaluation

    pub fn alpha(&self, k: LatticePoint) -> f64 {
        match &*self.source {
            Source::Table(t) => t.alpha(k),
            Source::Theta(omega) => omega.weight(k.degree()),
            Source::Prop2 { x, y } => match (k.k1, k.k2) {
                (0, 0) => *x,
                (0, _) => *y,
                _ => 1.0,
            },
            Source::Thm1 { omega, .. } => omega.weight(k.degree()),
            Source::Completion { row, constant, .. } => completion_alpha(row, *constant, k),
            Source::Core(w) => w.alpha(k.offset(1, 1)),
            Source::Toral(w) => (w.alpha(k) * w.alpha(k.right())).sqrt(),
            Source::Spherical(w) => w.alpha(k) * (w.polar(k.right()) / w.polar(k)).sqrt(),
            Source::Scaled(w, c) => c * w.alpha(k),
        }
    }

    pub fn beta(&self, k: LatticePoint) -> f64 {
        match &*self.source {
            Source::Table(t) => t.beta(k),
            Source::Theta(omega) => omega.weight(k.degree()),
            Source::Prop2 { x, y } => match (k.k1, k.k2) {
                (0, 0) => *x,
                (_, 0) => *y,
                _ => 1.0,
            },
            Source::Thm1 { omega, y } => y / omega.weight(0) * omega.weight(k.degree()),
            Source::Completion { row, constant, .. } => {
                let a = completion_alpha(row, *constant, k);
                (constant - a * a).sqrt()
            }
            Source::Core(w) => w.beta(k.offset(1, 1)),
            Source::Toral(w) => (w.beta(k) * w.beta(k.up())).sqrt(),
            Source::Spherical(w) => w.beta(k) * (w.polar(k.up()) / w.polar(k)).sqrt(),
            Source::Scaled(w, c) => c * w.beta(k),
        }
    }

    /// `P_k = √(α_k² + β_k²)`, the diagonal entry of `P = √(T₁*T₁ + T₂*T₂)`.
    pub fn polar(&self, k: LatticePoint) -> f64 {
        self.alpha(k).hypot(self.beta(k))
    }

    /// `|α_k β_{k+ε₁} − β_k α_{k+ε₂}|`
    pub fn commutativity_residual_at(&self, k: LatticePoint) -> f64 {
        (self.alpha(k) * self.beta(k.right()) - self.beta(k) * self.alpha(k.up())).abs()
    }

    fn commutativity_residual_on(&self, max1: usize, max2: usize) -> (f64, LatticePoint) {
        let mut worst = (0.0, LatticePoint::ORIGIN);
        for k1 in 0..=max1 {
            for k2 in 0..=max2 {
                let k = LatticePoint::new(k1, k2);
                let r = self.commutativity_residual_at(k);
                // NaN compares false; treat it as the worst possible residual.
                if r > worst.0 || r.is_nan() {
                    worst = (if r.is_nan() { f64::INFINITY } else { r }, k);
                }
            }
        }
        worst
    }

    /// Worst commutativity residual on `[0, window]²` and where it occurs.
    pub fn commutativity_residual(&self, window: usize) -> (f64, LatticePoint) {
        self.commutativity_residual_on(window, window)
    }

    pub fn is_commuting(&self, window: usize) -> bool {
        self.commutativity_residual(window).0 <= WEIGHT_TOL
    }

    /// Errors with [`Error::NonCommuting`] if the residual exceeds [`WEIGHT_TOL`].
    pub fn ensure_commuting(&self, window: usize) -> Result<()> {
        let (residual, at) = self.commutativity_residual(window);
        if residual > WEIGHT_TOL {
            Err(Error::NonCommuting { at, residual })
        } else {
            Ok(())
        }
    }

    /// Checks positivity on `[0, window]²` and returns `sup max(α, β)` there.
    pub fn weight_bound(&self, window: usize) -> Result<f64> {
        let mut sup = 0.0f64;
        for k in LatticePoint::square(window) {
            for w in [self.alpha(k), self.beta(k)] {
                if !(w > 0.0 && w.is_finite()) {
                    return Err(Error::InvalidWeights(format!("weight {w} at {k}")));
                }
                sup = sup.max(w);
            }
        }
        Ok(sup)
    }

    /// Largest `|α − α'|`, `|β − β'|` over `[0, window]²`.
    pub fn max_weight_deviation(&self, other: &WeightDiagram, window: usize) -> f64 {
        LatticePoint::square(window)
            .map(|k| {
                (self.alpha(k) - other.alpha(k))
                    .abs()
                    .max((self.beta(k) - other.beta(k)).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Tabulates `[0, window]²` into a table-kind diagram without re-validating.
    pub fn tabulate(&self, window: usize) -> TableWeights {
        let n = window + 1;
        let grid = |f: &dyn Fn(LatticePoint) -> f64| {
            (0..n)
                .map(|k2| (0..n).map(|k1| f(LatticePoint::new(k1, k2))).collect())
                .collect()
        };
        TableWeights {
            alpha: grid(&|k| self.alpha(k)),
            beta: grid(&|k| self.beta(k)),
            rows: n,
            cols: n,
        }
    }

    // ------------------------------------------------------------------- JSON

    /// Serializes the diagram. Closed-form kinds keep their parameters; derived
    /// diagrams are written as tables over `[0, window]²`.
    pub fn to_json(&self, window: usize) -> DiagramJson {
        let params = match &*self.source {
            Source::Theta(omega) => serde_json::json!({ "omega": omega }),
            Source::Prop2 { x, y } => serde_json::json!({ "x": x, "y": y }),
            Source::Thm1 { omega, y } => serde_json::json!({ "omega": omega, "y": y }),
            Source::Completion { row, constant, window } => {
                serde_json::json!({ "row": row, "constant": constant, "window": window })
            }
            Source::Table(t) => {
                return DiagramJson {
                    kind: "table".into(),
                    params: serde_json::json!({ "tail": "flat" }),
                    table: Some(t.clone()),
                }
            }
            _ => {
                return DiagramJson {
                    kind: "table".into(),
                    params: serde_json::json!({
                        "tail": "flat",
                        "source": self.kind().as_str(),
                        "window": window,
                    }),
                    table: Some(self.tabulate(window)),
                }
            }
        };
        DiagramJson { kind: self.kind().as_str().into(), params, table: None }
    }

    pub fn from_json(doc: &DiagramJson) -> Result<Self> {
        let p = &doc.params;
        let field = |name: &str| -> Result<serde_json::Value> {
            p.get(name)
                .cloned()
                .ok_or_else(|| Error::domain(format!("{} diagram needs params.{name}", doc.kind)))
        };
        let real = |name: &str| -> Result<f64> {
            field(name)?
                .as_f64()
                .ok_or_else(|| Error::domain(format!("params.{name} must be a number")))
        };
        match doc.kind.as_str() {
            "theta" => Self::theta(serde_json::from_value(field("omega")?)?),
            "prop2" => Self::prop2(real("x")?, real("y")?),
            "thm1" => Self::thm1(serde_json::from_value(field("omega")?)?, real("y")?),
            "quasinormal-completion" => {
                let window = p
                    .get("window")
                    .and_then(serde_json::Value::as_u64)
                    .map_or(DEFAULT_COMPLETION_WINDOW, |w| w as usize);
                Self::quasinormal_completion(
                    serde_json::from_value(field("row")?)?,
                    real("constant")?,
                    window,
                )
            }
            "table" => {
                if let Some(tail) = p.get("tail").and_then(serde_json::Value::as_str) {
                    if tail != "flat" {
                        return Err(Error::domain(format!("unsupported tail rule `{tail}`")));
                    }
                }
                let t = doc
                    .table
                    .as_ref()
                    .ok_or_else(|| Error::domain("table diagram needs a `table` object"))?;
                if t.alpha.len() != t.rows || t.alpha.first().map_or(0, Vec::len) != t.cols {
                    return Err(Error::Shape(format!(
                        "declared {}×{} but alpha is {}×{}",
                        t.rows,
                        t.cols,
                        t.alpha.len(),
                        t.alpha.first().map_or(0, Vec::len)
                    )));
                }
                Self::table(t.alpha.clone(), t.beta.clone())
            }
            other => Err(Error::domain(format!("unknown diagram kind `{other}`"))),
        }
    }
}

/// On-disk diagram document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramJson {
    pub kind: String,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<TableWeights>,
}

/// `α_k` of the quasinormal completion.
///
/// When the row carries a Berger measure `ξ` supported in `[0, C]`, the
/// completion has moments `γ_(m,n) = ∫ s^m (C−s)^n dξ` and `α_k² =
/// γ_(k+ε₁)/γ_k` is evaluated directly: the upward recursion loses a factor
/// of roughly `max s / min s` in relative accuracy per row. Other rows fall
/// back to the recursion over the triangle of points that `k` depends on.
fn completion_alpha(row: &OneVarWeights, constant: f64, k: LatticePoint) -> f64 {
    if let Some(xi) = row.measure().filter(|m| m.atoms.iter().all(|a| a.s < constant)) {
        return measure_completion_alpha(&xi, constant, k);
    }
    let mut line: Vec<f64> = (0..=k.k2).map(|c| row.weight(k.k1 + c)).collect();
    for _ in 0..k.k2 {
        let beta: Vec<f64> = line.iter().map(|a| (constant - a * a).sqrt()).collect();
        line = (0..line.len() - 1).map(|c| line[c] * beta[c + 1] / beta[c]).collect();
    }
    line[0]
}

fn measure_completion_alpha(xi: &AtomicMeasure1, constant: f64, k: LatticePoint) -> f64 {
    // Log-domain weights ρ s^k1 (C−s)^k2, shifted by their maximum.
    let logs: Vec<f64> = xi
        .atoms
        .iter()
        .map(|a| a.rho.ln() + k.k1 as f64 * a.s.ln() + k.k2 as f64 * (constant - a.s).ln())
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut num, mut den) = (0.0, 0.0);
    for (a, l) in xi.atoms.iter().zip(&logs) {
        let w = (l - top).exp();
        num += w * a.s;
        den += w;
    }
    (num / den).sqrt()
}

/// `α` of the completion on rows `0..=window`, columns `0..=window`.
fn completion_grid(row: &OneVarWeights, constant: f64, window: usize) -> Vec<Vec<f64>> {
    if row.measure().is_some_and(|m| m.atoms.iter().all(|a| a.s < constant)) {
        return (0..=window)
            .map(|k2| (0..=window).map(|k1| completion_alpha(row, constant, LatticePoint::new(k1, k2))).collect())
            .collect();
    }
    let mut line = row.weights(2 * window + 1);
    let mut grid = Vec::with_capacity(window + 1);
    for _ in 0..=window {
        grid.push(line[..=window].to_vec());
        let beta: Vec<f64> = line.iter().map(|a| (constant - a * a).sqrt()).collect();
        line = (0..line.len() - 1).map(|c| line[c] * beta[c + 1] / beta[c]).collect();
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(k1: usize, k2: usize) -> LatticePoint {
        LatticePoint::new(k1, k2)
    }

    #[test]
    fn theta_weights() {
        let flat = WeightDiagram::theta(OneVarWeights::constant(1.0).unwrap()).unwrap();
        assert!(LatticePoint::square(6).all(|k| flat.alpha(k) == 1.0 && flat.beta(k) == 1.0));

        let abc = OneVarWeights::table(vec![0.3, 0.6, 0.9, 1.0]).unwrap();
        let w = WeightDiagram::theta(abc).unwrap();
        assert_eq!(w.alpha(p(1, 1)), 0.9);

        let alt = WeightDiagram::theta(OneVarWeights::periodic(vec![0.5, 2.0]).unwrap()).unwrap();
        assert_eq!(alt.alpha(p(0, 0)), 0.5);
        assert_eq!(alt.alpha(p(1, 0)), 2.0);
        assert!(WeightDiagram::theta(OneVarWeights::Constant { value: -1.0 }).is_err());
    }

    #[test]
    fn prop2_weights() {
        let w = WeightDiagram::prop2(0.5, 0.5).unwrap();
        assert_eq!(w.alpha(p(0, 1)), 0.5);
        assert_eq!(w.alpha(p(1, 0)), 1.0);
        let w = WeightDiagram::prop2(0.9, 0.1).unwrap();
        assert_eq!(w.beta(p(3, 0)), 0.1);
        assert_eq!(w.beta(p(3, 1)), 1.0);
        assert_eq!(w.commutativity_residual_at(p(0, 0)), 0.0);
        assert!(WeightDiagram::prop2(1.0, 0.5).is_err());
        assert!(WeightDiagram::prop2(0.5, 0.0).is_err());
    }

    #[test]
    fn thm1_weights() {
        let omega = OneVarWeights::table(vec![0.4, 0.7, 0.8, 0.9]).unwrap();
        let w = WeightDiagram::thm1(omega.clone(), 0.6).unwrap();
        assert_eq!(w.beta(p(0, 0)), 0.6);
        assert!((w.beta(p(0, 1)) - 0.7 * 0.6 / 0.4).abs() < 1e-15);
        let same = WeightDiagram::thm1(omega.clone(), 0.4).unwrap();
        let theta = WeightDiagram::theta(omega).unwrap();
        assert_eq!(same.max_weight_deviation(&theta, 10), 0.0);
    }

    #[test]
    fn table_validation() {
        let unit = WeightDiagram::table(vec![vec![1.0]], vec![vec![1.0]]).unwrap();
        assert!(LatticePoint::square(5).all(|k| unit.alpha(k) == 1.0 && unit.beta(k) == 1.0));

        // prop2(0.5, 0.5) tabulated on [0,4]² agrees with the generator on [0,3]².
        let gen = WeightDiagram::prop2(0.5, 0.5).unwrap();
        let t = gen.tabulate(4);
        let tab = WeightDiagram::table(t.alpha, t.beta).unwrap();
        assert_eq!(tab.max_weight_deviation(&gen, 3), 0.0);

        let err = WeightDiagram::table(
            vec![vec![1.0, 1.0], vec![2.0, 1.0]],
            vec![vec![1.0, 1.0], vec![1.0, 1.0]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonCommuting { at, .. } if at == p(0, 0)));
        assert!(matches!(
            WeightDiagram::table(vec![vec![1.0]], vec![vec![1.0, 1.0]]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn core_examples() {
        let core = WeightDiagram::prop2(0.3, 0.7).unwrap().core_of();
        assert_eq!(core.max_weight_deviation(&WeightDiagram::flat(), 10), 0.0);

        let omega = OneVarWeights::table(vec![0.2, 0.4, 0.5, 0.7, 0.8, 0.95]).unwrap();
        let core = WeightDiagram::theta(omega.clone()).unwrap().core_of();
        let shifted = WeightDiagram::theta(omega.shifted(2)).unwrap();
        assert_eq!(core.max_weight_deviation(&shifted, 10), 0.0);

        let flat = WeightDiagram::flat();
        assert_eq!(flat.core_of().max_weight_deviation(&flat, 8), 0.0);
    }

    #[test]
    fn completion_recursion() {
        let row = OneVarWeights::stampfli(1.0, 2.0, 3.0).unwrap();
        let w = WeightDiagram::quasinormal_completion(row, 4.0, 12).unwrap();
        assert!((w.beta(p(0, 0)) - 3f64.sqrt()).abs() < 1e-12);
        assert!((w.alpha(p(0, 1)) - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(w.is_commuting(12));
        for k in LatticePoint::square(12) {
            let c = w.alpha(k).powi(2) + w.beta(k).powi(2);
            assert!((c - 4.0).abs() < 1e-12);
        }

        let flat = WeightDiagram::quasinormal_completion(OneVarWeights::constant(0.8).unwrap(), 1.28, 8)
            .unwrap();
        for k in LatticePoint::square(8) {
            assert!((flat.alpha(k) - 0.8).abs() < 1e-12 && (flat.beta(k) - 0.8).abs() < 1e-12);
        }

        let row = OneVarWeights::stampfli(1.0, 2.0, 3.0).unwrap();
        assert!(matches!(
            WeightDiagram::quasinormal_completion(row, 2.5, 8),
            Err(Error::InfeasibleConstant { .. })
        ));
    }

    #[test]
    fn completion_independent_of_window() {
        let row = OneVarWeights::stampfli(1.0, 2.0, 4.0).unwrap();
        let small = WeightDiagram::quasinormal_completion(row.clone(), 6.0, 6).unwrap();
        let large = WeightDiagram::quasinormal_completion(row.clone(), 6.0, 20).unwrap();
        assert_eq!(small.max_weight_deviation(&large, 10), 0.0);
        let grid = completion_grid(&row, 6.0, 10);
        for k in LatticePoint::square(10) {
            assert!((grid[k.k2][k.k1] - large.alpha(k)).abs() < 1e-13);
        }
    }

    #[test]
    fn json_round_trip_closed_forms() {
        let docs = [
            WeightDiagram::prop2(0.5, 0.25).unwrap(),
            WeightDiagram::theta(OneVarWeights::periodic(vec![0.5, 2.0]).unwrap()).unwrap(),
            WeightDiagram::thm1(OneVarWeights::stampfli(1.0, 2.0, 3.0).unwrap(), 0.7).unwrap(),
            WeightDiagram::quasinormal_completion(
                OneVarWeights::stampfli(1.0, 2.0, 3.0).unwrap(),
                4.0,
                10,
            )
            .unwrap(),
        ];
        for w in docs {
            let text = serde_json::to_string(&w.to_json(6)).unwrap();
            let back = WeightDiagram::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
            assert_eq!(back.kind(), w.kind());
            assert_eq!(back.max_weight_deviation(&w, 8), 0.0);
        }
    }

    #[test]
    fn derived_diagrams_serialize_as_tables() {
        let w = WeightDiagram::prop2(0.5, 0.5).unwrap().spherical_of();
        let doc = w.to_json(5);
        assert_eq!(doc.kind, "table");
        assert_eq!(doc.params["source"], "spherical-transform");
        let back = WeightDiagram::from_json(&doc).unwrap();
        assert!(back.max_weight_deviation(&w, 5) < 1e-15);
    }
}
