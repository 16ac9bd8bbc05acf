//! Exact simulation of the instrumental piecewise-deterministic process.
//!
//! Between jumps the state flows along dx/dt = c(x); jumps arrive with
//! state-dependent rate K(x) (simulated exactly by thinning against a
//! constant bound) and move the state down to a point drawn from the
//! mass-weighted kernel. The path weight is the exponential functional
//! exp(integral of c(X_s)/X_s ds), accumulated as a telescoping product of
//! flow-segment position ratios: no quadrature error enters the weight.

pub mod rng;
mod simulate;

pub use rng::RngStream;
pub use simulate::{
    hitting_functional, simulate_path, HitOutcome, JumpEvent, Path, SimError, StopReason,
    StoppingSpec,
};
