//! Seeded inputs shared by the benchmarks.

use gqms_core::random::random_model;
use gqms_core::GaussianModel;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `n` random models with `d` modes from a fixed seed.
pub fn sample_models(seed: u64, n: usize, d: usize) -> Vec<GaussianModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_model(&mut rng, Some(d))).collect()
}
