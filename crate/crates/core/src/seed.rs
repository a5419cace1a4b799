//! Splittable seed hierarchy. Every random stream in the crate is derived
//! from one root seed through [`derive`], so a run is reproducible from
//! `(config, seed)` and independent of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed of `parent` along `path`.
pub fn derive(parent: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(parent), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Stream labels, so that sibling streams never collide.
pub mod label {
    pub const LATTICE: u64 = 1;
    pub const SAMPLER: u64 = 2;
    pub const SEMIPRIME: u64 = 3;
    pub const TAU: u64 = 4;
    pub const POINT: u64 = 5;
    pub const RECOVERY: u64 = 6;
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
