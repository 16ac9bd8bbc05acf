//! Reproducible per-path random streams.
//!
//! Every path gets its own ChaCha stream addressed by (master seed, path
//! index). Streams are statistically independent, and a path's stream does
//! not depend on how many other paths were simulated, so pools can be
//! extended or re-run with longer horizons while earlier paths replay
//! bit-identically.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub master_seed: u64,
}

impl RngStream {
    pub fn new(master_seed: u64) -> Self {
        RngStream { master_seed }
    }

    /// The generator for one path.
    pub fn path_rng(&self, path_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(path_index);
        rng
    }
}
