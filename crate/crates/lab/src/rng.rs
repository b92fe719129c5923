//! Per-run random streams.
//!
//! Run `i` of an experiment seeded with `s` draws from ChaCha8 keyed by `s`
//! on stream `i`, so a run's draws do not depend on which thread executes it
//! or on how many runs precede it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Recorded in CSV metadata.
pub const GENERATOR_ID: &str = "rand_chacha::ChaCha8Rng 0.9 (key = seed_from_u64(seed), stream = run index)";

pub fn run_stream(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

/// Independent master seed for a labelled sub-experiment, e.g. one point of
/// a sweep.
pub fn derive_seed(seed: u64, label: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    h.update(index.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 is 32 bytes"))
}
