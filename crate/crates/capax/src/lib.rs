//! Exact lattice-optimisation capacities of polarised surfaces and convex
//! toric domains.
//!
//! The crate computes, with exact rational arithmetic throughout:
//!
//! - ECH capacities of rational convex toric domains, as minima of the
//!   weighted perimeter functional over convex lattice polygons with a
//!   prescribed number of lattice points, together with a brute-force oracle;
//! - algebraic capacities of toric surfaces (minimal intersection number
//!   against the polarisation over nef divisors with enough sections) and of
//!   abstract surfaces presented by an intersection lattice;
//! - derived structure: gaps and attained residues, quasi-polynomial
//!   presentations of the cap function, sub-leading error terms, chamber
//!   decompositions of the big cone, the isoparametric transform, and
//!   embedding obstructions.

pub mod asymptotics;
pub mod domains;
pub mod ech;
pub mod error;
pub mod fixtures;
pub mod geom;
pub mod rat;
pub mod surfaces;
pub mod toric;
pub mod wire;

pub use error::{Error, Result};
pub use rat::Rat;
