//! Seeded inputs shared by the benchmarks.

use qdsm_core::sampling;
use qdsm_core::{Channel, DsMatrix, Tolerance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `count` random doubly stochastic channels with `d` Kraus operators on `M_n`.
pub fn channels(n: usize, d: usize, count: usize, seed: u64) -> Vec<Channel> {
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| sampling::random_channel(n, d, &mut rng, &tol).expect("scaling converges"))
        .collect()
}

/// Random mixture of `terms` permutation matrices of size `n`.
pub fn ds_matrix(n: usize, terms: usize, seed: u64) -> DsMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sampling::random_ds_matrix(n, terms, &mut rng, &Tolerance::default()).expect("valid mixture")
}
