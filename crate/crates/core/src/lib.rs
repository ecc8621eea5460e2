//! Toral and spherical Aluthge transforms of 2-variable weighted shifts,
//! with numerical tests for commutativity, (joint, k-) hyponormality,
//! spherical quasinormality and atomic Berger measures.
//!
//! ```
//! use aluthge_lab::{diagram::WeightDiagram, transforms::spherical_transform, LatticePoint};
//!
//! let w = WeightDiagram::prop2(0.5, 0.5)?;
//! let s = spherical_transform(&w)?;
//! assert!((s.alpha(LatticePoint::ORIGIN) - 0.628716).abs() < 1e-6);
//! # Ok::<(), aluthge_lab::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagram;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod linalg;
pub mod measures;
pub mod moments;
pub mod onevar;
pub mod positivity;
pub mod regions;
pub mod sampling;
pub mod transforms;
pub mod truncation;

pub use diagram::{DiagramJson, WeightDiagram};
pub use error::{Error, ErrorClass, Result};
pub use lattice::LatticePoint;
pub use onevar::OneVarWeights;
