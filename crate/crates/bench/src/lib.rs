//! Benchmark fixtures shared by the criterion targets.

use ciphermimic::dataset::generate_pairs;
use ciphermimic::{CipherOracle, FeatureEncoding, PairSet};
use ndarray::Array2;

/// A seeded batch of `n` pairs from `oracle`.
pub fn pairs(oracle: &dyn CipherOracle, n: usize, seed: u64) -> PairSet {
    generate_pairs(oracle, n, seed, None).expect("oracle input space holds the batch")
}

/// Features and targets of a seeded batch, ready for the network.
pub fn batch(oracle: &dyn CipherOracle, n: usize, seed: u64) -> (Array2<f32>, Array2<u8>) {
    let set = pairs(oracle, n, seed);
    (set.features(FeatureEncoding::PlusMinusOne), set.target_bits())
}
