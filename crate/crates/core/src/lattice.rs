use std::fmt;

use serde::{Deserialize, Serialize};

/// Multi-index `(k1, k2)` of the lattice basis vector `e_(k1,k2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    pub k1: usize,
    pub k2: usize,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { k1: 0, k2: 0 };

    pub const fn new(k1: usize, k2: usize) -> Self {
        LatticePoint { k1, k2 }
    }

    /// `k + ε₁`
    pub const fn right(self) -> Self {
        LatticePoint::new(self.k1 + 1, self.k2)
    }

    /// `k + ε₂`
    pub const fn up(self) -> Self {
        LatticePoint::new(self.k1, self.k2 + 1)
    }

    pub const fn offset(self, d1: usize, d2: usize) -> Self {
        LatticePoint::new(self.k1 + d1, self.k2 + d2)
    }

    pub const fn degree(self) -> usize {
        self.k1 + self.k2
    }

    /// All points of the square `[0, max]²`, `k1`-major.
    pub fn square(max: usize) -> impl Iterator<Item = LatticePoint> {
        (0..=max).flat_map(move |k1| (0..=max).map(move |k2| LatticePoint::new(k1, k2)))
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k1, self.k2)
    }
}

impl From<(usize, usize)> for LatticePoint {
    fn from((k1, k2): (usize, usize)) -> Self {
        LatticePoint::new(k1, k2)
    }
}
