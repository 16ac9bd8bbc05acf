//! Simulation and verification toolkit for growth-fragmentation semigroups.
//!
//! The library has two independent engines for the same object and a layer of
//! consistency checks between them:
//!
//! * a Monte Carlo engine (`pdmp`, `fk`, `malthus`) that simulates the
//!   instrumental piecewise-deterministic Markov process exactly and estimates
//!   semigroup values, hitting-time Laplace transforms, the Malthus exponent
//!   and the asymptotic profile from weighted paths;
//! * a deterministic grid engine (`grid`) that discretizes the generator on a
//!   logarithmic grid and produces semigroup values and killed principal
//!   eigenpairs by classical numerics;
//! * inequality and criteria checks (`criteria`, plus the comparison helpers
//!   in `grid::compare`) that confront the two engines with each other and
//!   with the structural identities the underlying theory guarantees.
//!
//! Everything downstream of a `ModelSpec` is deterministic given a master
//! seed: paths are indexed by a counter-based RNG stream, parallel reductions
//! run in fixed batch order, and artifacts embed the model hash and seed.

pub mod criteria;
pub mod fk;
pub mod grid;
pub mod malthus;
pub mod model;
pub mod numeric;
pub mod pdmp;
pub mod report;

/// Tool version embedded in every artifact.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
