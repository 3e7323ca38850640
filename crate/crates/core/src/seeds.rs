//! Deterministic derivation of child seeds from a root seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `parent` with a `tag` into an independent-looking child seed.
pub fn derive_seed(parent: u64, tag: u64) -> u64 {
    splitmix(splitmix(parent) ^ tag.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Rng for `(seed, stream)`; each stream is a separate ChaCha stream.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
