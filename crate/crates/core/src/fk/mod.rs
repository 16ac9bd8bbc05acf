//! Monte Carlo functionals of the instrumental process.
//!
//! Everything here is an average of per-path contributions. Paths are
//! addressed by (master seed, path index), batched over fixed index ranges,
//! and the batch statistics are merged in index order, so every estimate is
//! bit-reproducible regardless of thread count.
//!
//! Two estimator families live here:
//!
//! * time-horizon functionals of the weighted process (the semigroup
//!   representation and its exponentially discounted variant), and
//! * hitting functionals held in an [`ExcursionPool`]: the pool stores one
//!   record per path (did it reach the target, when, and with what weight)
//!   and reweights the same records for any decay parameter q. Pools extend
//!   to more paths and escalate to longer censoring horizons without
//!   disturbing the paths already simulated.

mod estimate;
mod pool;

pub use estimate::{
    estimate_semigroup, tilted_expectation, FkError, MCEstimate, TestFunction,
};
pub use pool::{ExcursionPool, ExcursionRecord};
