//! One-variable weight sequences `ω = (ω₀, ω₁, …)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::StampfliData;

/// Atom `ρ δ_s` of a measure on `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom1 {
    pub s: f64,
    pub rho: f64,
}

/// Finitely atomic probability measure; its moments `γ_j = Σ ρ s^j` define a
/// subnormal weighted shift through `ω_j² = γ_{j+1} / γ_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure1 {
    pub atoms: Vec<Atom1>,
}

impl AtomicMeasure1 {
    pub fn new(atoms: Vec<Atom1>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidWeights("measure has no atoms".into()));
        }
        for a in &atoms {
            if !(a.s > 0.0 && a.s.is_finite() && a.rho > 0.0 && a.rho.is_finite()) {
                return Err(Error::InvalidWeights(format!(
                    "atom (s={}, rho={}) must have positive finite position and mass",
                    a.s, a.rho
                )));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.rho).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeights(format!("masses sum to {total}, not 1")));
        }
        Ok(AtomicMeasure1 { atoms })
    }

    pub fn moment(&self, j: usize) -> f64 {
        self.atoms.iter().map(|a| a.rho * a.s.powi(j as i32)).sum()
    }

    fn max_atom(&self) -> f64 {
        self.atoms.iter().map(|a| a.s).fold(0.0, f64::max)
    }

    /// `γ_{j+1} / γ_j`, evaluated with the moments rescaled by the largest atom
    /// so that high indices neither overflow nor lose the small atoms.
    pub fn weight_squared(&self, j: usize) -> f64 {
        let top = self.max_atom();
        let (mut num, mut den) = (0.0, 0.0);
        for a in &self.atoms {
            let r = (a.s / top).powi(j as i32);
            den += a.rho * r;
            num += a.rho * r * (a.s / top);
        }
        top * num / den
    }
}

/// Weight sequence of a one-variable unilateral weighted shift.
///
/// Every variant is defined for all indices; `Table` repeats its last entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OneVarWeights {
    Constant { value: f64 },
    Periodic { values: Vec<f64> },
    Table { values: Vec<f64> },
    Measure { measure: AtomicMeasure1 },
    Stampfli { a: f64, b: f64, c: f64 },
    Shifted { inner: Box<OneVarWeights>, by: usize },
    Scaled { inner: Box<OneVarWeights>, factor: f64 },
}

impl OneVarWeights {
    pub fn constant(value: f64) -> Result<Self> {
        Self::Constant { value }.validated()
    }

    pub fn periodic(values: Vec<f64>) -> Result<Self> {
        Self::Periodic { values }.validated()
    }

    /// Finite list with flat tail: `ω_j = values[min(j, len-1)]`.
    pub fn table(values: Vec<f64>) -> Result<Self> {
        Self::Table { values }.validated()
    }

    pub fn from_measure(measure: AtomicMeasure1) -> Self {
        Self::Measure { measure }
    }

    /// Stampfli's subnormal completion of `(√a, √b, √c)`.
    pub fn stampfli(a: f64, b: f64, c: f64) -> Result<Self> {
        StampfliData::new(a, b, c)?;
        Ok(Self::Stampfli { a, b, c })
    }

    /// `j ↦ ω_{j+by}`
    pub fn shifted(&self, by: usize) -> Self {
        Self::Shifted { inner: Box::new(self.clone()), by }
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidWeights(format!("scale factor {factor} must be positive")));
        }
        Ok(Self::Scaled { inner: Box::new(self.clone()), factor })
    }

    fn validated(self) -> Result<Self> {
        let stored: &[f64] = match &self {
            Self::Constant { value } => std::slice::from_ref(value),
            Self::Periodic { values } | Self::Table { values } => values,
            _ => &[],
        };
        if matches!(&self, Self::Periodic { values } | Self::Table { values } if values.is_empty()) {
            return Err(Error::InvalidWeights("empty weight list".into()));
        }
        if let Some(bad) = stored.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidWeights(format!("weight {bad} is not positive")));
        }
        Ok(self)
    }

    pub fn weight(&self, j: usize) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Periodic { values } => values[j % values.len()],
            Self::Table { values } => values[j.min(values.len() - 1)],
            Self::Measure { measure } => measure.weight_squared(j).sqrt(),
            Self::Stampfli { a, b, c } => StampfliData::new(*a, *b, *c)
                .expect("validated at construction")
                .measure()
                .weight_squared(j)
                .sqrt(),
            Self::Shifted { inner, by } => inner.weight(j + by),
            Self::Scaled { inner, factor } => factor * inner.weight(j),
        }
    }

    /// Berger measure of the sequence when it is carried by the variant
    /// (`ω_j² = γ_{j+1}/γ_j` for all `j`).
    pub fn measure(&self) -> Option<AtomicMeasure1> {
        match self {
            Self::Constant { value } => Some(AtomicMeasure1 { atoms: vec![Atom1 { s: value * value, rho: 1.0 }] }),
            Self::Measure { measure } => Some(measure.clone()),
            Self::Stampfli { a, b, c } => StampfliData::new(*a, *b, *c).ok().map(|d| d.measure()),
            Self::Scaled { inner, factor } => inner.measure().map(|m| AtomicMeasure1 {
                atoms: m.atoms.iter().map(|a| Atom1 { s: a.s * factor * factor, rho: a.rho }).collect(),
            }),
            Self::Shifted { inner, by } => inner.measure().map(|m| {
                // ρ_i s_i^by, renormalized in the log domain.
                let logs: Vec<f64> = m.atoms.iter().map(|a| a.rho.ln() + *by as f64 * a.s.ln()).collect();
                let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let raw: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
                let total: f64 = raw.iter().sum();
                AtomicMeasure1 {
                    atoms: m.atoms.iter().zip(&raw).map(|(a, r)| Atom1 { s: a.s, rho: r / total }).collect(),
                }
            }),
            Self::Periodic { .. } | Self::Table { .. } => None,
        }
    }

    pub fn weights(&self, len: usize) -> Vec<f64> {
        (0..len).map(|j| self.weight(j)).collect()
    }

    /// Checks positivity and finiteness on `0..=window` and returns the sup there.
    pub fn validate(&self, window: usize) -> Result<f64> {
        let mut sup = 0.0f64;
        for j in 0..=window {
            let w = self.weight(j);
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidWeights(format!("ω_{j} = {w} is not positive")));
            }
            sup = sup.max(w);
        }
        Ok(sup)
    }

    /// Moments `γ_0 = 1`, `γ_{j+1} = ω_j² γ_j` for `j < len`.
    pub fn moments(&self, len: usize) -> Vec<f64> {
        let mut gamma = Vec::with_capacity(len + 1);
        gamma.push(1.0);
        for j in 0..len {
            let w = self.weight(j);
            gamma.push(gamma[j] * w * w);
        }
        gamma
    }

    pub fn is_nondecreasing(&self, window: usize) -> bool {
        (0..window).all(|j| self.weight(j) <= self.weight(j + 1))
    }
}

impl fmt::Display for OneVarWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match self {
            Self::Constant { value } => write!(f, "constant:{value}"),
            Self::Periodic { values } => write!(f, "periodic:{}", list(values)),
            Self::Table { values } => write!(f, "table:{}", list(values)),
            Self::Measure { measure } => {
                let atoms: Vec<f64> = measure.atoms.iter().flat_map(|a| [a.s, a.rho]).collect();
                write!(f, "measure:{}", list(&atoms))
            }
            Self::Stampfli { a, b, c } => write!(f, "stampfli:{a},{b},{c}"),
            Self::Shifted { inner, by } => write!(f, "shift({inner}, {by})"),
            Self::Scaled { inner, factor } => write!(f, "{factor}*({inner})"),
        }
    }
}

/// Parses `constant:v`, `periodic:v0,v1,…`, `table:v0,v1,…`, `stampfli:a,b,c`
/// and `measure:s0,rho0,s1,rho1,…`.
impl FromStr for OneVarWeights {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::domain(format!("weight string `{s}` lacks `kind:` prefix")))?;
        let nums = rest
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::domain(format!("weight string `{s}`: {e}")))?;
        match (kind.trim(), nums.as_slice()) {
            ("constant", [v]) => Self::constant(*v),
            ("periodic", v) => Self::periodic(v.to_vec()),
            ("table", v) => Self::table(v.to_vec()),
            ("stampfli", [a, b, c]) => Self::stampfli(*a, *b, *c),
            ("measure", v) if v.len() % 2 == 0 => {
                let atoms = v.chunks(2).map(|p| Atom1 { s: p[0], rho: p[1] }).collect();
                Ok(Self::from_measure(AtomicMeasure1::new(atoms)?))
            }
            _ => Err(Error::domain(format!("unrecognised weight string `{s}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_and_table_tails() {
        let w = OneVarWeights::periodic(vec![0.5, 2.0]).unwrap();
        assert_eq!(w.weights(5), vec![0.5, 2.0, 0.5, 2.0, 0.5]);
        let t = OneVarWeights::table(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.weight(10), 3.0);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(OneVarWeights::constant(0.0).is_err());
        assert!(OneVarWeights::table(vec![1.0, -1.0]).is_err());
        assert!(OneVarWeights::periodic(vec![]).is_err());
    }

    #[test]
    fn parse_round_trip() {
        let w: OneVarWeights = "stampfli:1,2,3".parse().unwrap();
        assert_eq!(w, OneVarWeights::Stampfli { a: 1.0, b: 2.0, c: 3.0 });
        let p: OneVarWeights = "periodic:0.5,2".parse().unwrap();
        assert_eq!(p.to_string().parse::<OneVarWeights>().unwrap(), p);
        assert!("stampfli:3,2,1".parse::<OneVarWeights>().is_err());
        assert!("bogus".parse::<OneVarWeights>().is_err());
    }

    #[test]
    fn carried_measures_reproduce_weights() {
        let st = OneVarWeights::stampfli(1.0, 2.0, 3.0).unwrap();
        for w in [st.clone(), st.shifted(3), st.scaled(0.5).unwrap(), OneVarWeights::constant(0.7).unwrap()] {
            let m = w.measure().unwrap();
            for j in 0..20 {
                assert!((m.weight_squared(j).sqrt() - w.weight(j)).abs() < 1e-12, "{w} at {j}");
            }
        }
        assert!(OneVarWeights::table(vec![1.0]).unwrap().measure().is_none());
    }

    #[test]
    fn measure_weights_match_moment_ratios() {
        let m = AtomicMeasure1::new(vec![Atom1 { s: 0.5, rho: 0.25 }, Atom1 { s: 2.0, rho: 0.75 }])
            .unwrap();
        for j in 0..30 {
            let direct = m.moment(j + 1) / m.moment(j);
            assert!((m.weight_squared(j) - direct).abs() <= 1e-12 * direct);
        }
    }
}
