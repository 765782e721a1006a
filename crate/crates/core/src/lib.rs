//! Numerical differential geometry on truncated Taylor jets.
//!
//! The crate evaluates geometric objects (metrics, connections, forms,
//! Weyl structures, Toda potentials) at sample points as jets, so that every
//! derivative needed by a curvature or PDE identity is exact up to rounding.
//!
//! Module map:
//! - [`jets`]: the jet number type.
//! - [`fields`]: charts, tensor fields and exterior calculus.
//! - [`curvature`]: Levi-Civita, Riemann, Ricci, Weyl and the SD/ASD split.
//! - [`projective`]: two-dimensional projective structures.
//! - [`dm_einstein`]: the Einstein metrics on the cotangent bundle and their
//!   Kaluza–Klein lift.
//! - [`einstein_weyl`]: Weyl structures, symmetry reduction and monopoles.
//! - [`toda`]: SU(∞) Toda solutions and Tod's construction.

pub mod curvature;
pub mod dm_einstein;
pub mod einstein_weyl;
pub mod error;
pub mod fields;
pub mod jets;
pub mod projective;
pub mod quad;
pub mod toda;

pub use error::{Error, Result};
pub use fields::expr::Expr;
pub use jets::{Jet, JetConfig};
