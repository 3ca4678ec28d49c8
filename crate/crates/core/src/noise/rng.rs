//! Counter-based normal and sign draws keyed by `(seed, stream, ordinal)`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub(crate) const COEFFICIENT_STREAM: u64 = 1;
pub(crate) const SIGN_STREAM: u64 = 2;

/// Each ordinal owns a disjoint window of `2^16` words in its stream.
const WORDS_PER_ORDINAL_LOG2: u32 = 16;

fn generator_at(seed: u64, stream: u64, ordinal: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos((ordinal as u128) << WORDS_PER_ORDINAL_LOG2);
    rng
}

pub(crate) fn standard_normal(seed: u64, ordinal: usize) -> f64 {
    generator_at(seed, COEFFICIENT_STREAM, ordinal).sample(StandardNormal)
}

pub(crate) fn sign(seed: u64, ordinal: usize) -> f64 {
    if generator_at(seed, SIGN_STREAM, ordinal).next_u32() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `index` of an experiment keyed by `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}
