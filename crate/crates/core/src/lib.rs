//! Recomputes the classification of torsion groups that occur for infinitely
//! many elliptic curves over number fields of a fixed degree, with every
//! intermediate invariant and a replayable proof trace.
//!
//! The modules build on each other bottom-up:
//!
//! - [`congruence`]: cosets, cusps, elliptic points and genera of `X₁(N)` and `X₁(2,2n)`.
//! - [`field`] and [`pointcount`]: finite-field point counts of `X₁(2,2n)` by
//!   enumerating elliptic curves with a `ℤ/2 × ℤ/2n` level structure.
//! - [`bounds`]: exact-rational gonality and density-degree bounds.
//! - [`units`]: modular units built from Siegel functions, giving degree certificates.
//! - [`census`]: forward-chaining inference producing the final verdicts and trace.

pub mod arith;
pub mod bounds;
pub mod census;
pub mod congruence;
pub mod error;
pub mod field;
pub mod pointcount;
pub mod units;

pub use congruence::{Invariants, SubgroupSpec};
pub use error::{Error, Result};
