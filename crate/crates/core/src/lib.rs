//! Exact finite-field incidence geometry at desk scale.
//!
//! The crate is organised bottom-up:
//!
//! * [`ff`] prime fields, quadratic extensions, characters and Gauss sums;
//! * [`geom`] canonical lines and flats of `F^n` and their enumeration;
//! * [`quadric`] quadratic forms, level sets and null vectors;
//! * [`construct`] the unit-sphere and Heisenberg configurations with
//!   Wolff-axiom and direction audits;
//! * [`reguli`] frames, transversals, reguli and the three-regulus counts;
//! * [`incidence`] incidence tables, popularity refinement, the
//!   Cauchy-Schwarz and incidence-bound checks, the iterated refinement
//!   pipeline, H-shaped configurations and a Monte Carlo probe.

// index loops mirror the matrix formulas they implement
#![allow(clippy::needless_range_loop)]

pub mod bitset;
pub mod construct;
pub mod error;
pub mod ff;
pub mod geom;
pub mod incidence;
pub mod linalg;
pub mod quadric;
pub mod reguli;
pub mod rng;

pub use bitset::PointSet;
pub use error::{Error, Result};
pub use ff::{FieldElement, FieldSpec};
pub use geom::{Flat, Line, Point, Space};
pub use quadric::QuadraticForm;
pub use reguli::{Frame, Regulus};
pub use incidence::IncidenceStructure;

/// Engine version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
