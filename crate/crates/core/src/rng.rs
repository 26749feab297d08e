//! Seeded random streams.
//!
//! Every experiment takes one root seed. Generators draw from stream 0 of
//! ChaCha8 keyed by the root seed; trial `i` draws from stream `i + 1`. Any
//! single trial can be replayed in isolation and results do not depend on how
//! trials are spread over threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// Stream for trial `index` under `root_seed`.
pub fn trial_rng(root_seed: u64, index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

/// Stream used by generators and one-shot runs.
pub fn seeded(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}
