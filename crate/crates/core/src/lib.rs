//! L2-discrepancies of weighted point sets, energies on the discretized torus,
//! and weak Latin hypercubes.
//!
//! Evaluators are generic over [`Scalar`], so the same code runs in exact
//! rational arithmetic ([`Rational`]) and in `f64`.

pub mod discrepancy;
pub mod energy;
pub mod error;
pub mod grid;
pub mod io;
pub mod latin;
pub mod optimize;
pub mod points;
pub mod scalar;
pub mod stats;
pub mod triple;

pub use discrepancy::{l2_discrepancy_warnock, DiscrepancyKind};
pub use energy::{CoefficientTable, EnergyKind, ExcessReport};
pub use error::{Error, Result};
pub use grid::{GridWeights, Row, TorusGrid};
pub use latin::{HypercubeFamily, StrongLatinHypercube, WeakLatinHypercube};
pub use points::WeightedPointSet;
pub use scalar::{Rational, Scalar};
pub use triple::{EnergyTriple, SampledTriple, TripleConstants};
