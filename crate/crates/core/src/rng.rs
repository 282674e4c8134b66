//! Seed derivation and per-path random streams.
//!
//! Every path in an ensemble owns a stream derived from `(master seed, index)`,
//! so results never depend on how the paths are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of child `index` of `master`. Distinct indices give unrelated seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix(mix(master) ^ mix(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

/// The generator a path with `seed` draws its primary normals from.
pub fn path_stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Auxiliary stream `stream` of the same seed, e.g. for one refinement level.
pub fn aux_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // stream 0 is the primary stream
    rng.set_stream(stream.wrapping_add(1));
    rng
}
