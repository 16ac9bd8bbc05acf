//! Decay-rate solver built on hitting-time functionals.
//!
//! The central object is the discounted return functional q -> L(q) of
//! excursions from an anchor back to itself. L is nonincreasing and convex
//! in q, and the growth exponent of the weighted semigroup is the smallest q
//! where L drops below 1. The solver estimates that root by stochastic
//! bisection: the sign of L - 1 at a candidate q must be three standard
//! errors clear before an endpoint moves, and when it is not, the solver
//! first buys more paths, then longer censoring horizons, and finally gives
//! up honestly with the interval it could certify.
//!
//! The same machinery, with barrier censors, yields the window-restricted
//! exponents; the anchor eigenfunction value and the stationary profile
//! density come from reweighting hit records of auxiliary pools.

mod profile;
mod solve;

pub use profile::{compute_profile, fit_growth_rate, GrowthFit, ProfileConfig, ProfilePoint, ProfileResult};
pub use solve::{
    check_cond_bw2, restricted_exponent, solve_malthus, CondBw2Result, DeltaVerdict,
    MalthusError, MalthusResult, RestrictionMode, SolverConfig, TriState,
};
