//! Seeded random streams. Every consumer draws from its own ChaCha stream
//! so results do not depend on call order elsewhere.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::{Real, C};

pub const STREAM_SYSTEM: u64 = 1;
pub const STREAM_GAMMA: u64 = 2;
pub const STREAM_TRACE_G: u64 = 3;
pub const STREAM_LOOP: u64 = 4;
pub const STREAM_PROBE: u64 = 5;
pub const STREAM_SUBSET: u64 = 6;
pub const STREAM_GALLERY: u64 = 7;

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes a sub-index into a seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Modulus uniform in [0.5, 1.5), phase uniform.
pub fn annulus<T: Real>(rng: &mut impl Rng) -> C<T> {
    let r = 0.5 + rng.random::<f64>();
    let theta = TAU * rng.random::<f64>();
    C::from_polar(T::c(r), T::c(theta))
}

pub fn unit_circle<T: Real>(rng: &mut impl Rng) -> C<T> {
    let theta = TAU * rng.random::<f64>();
    C::from_polar(T::one(), T::c(theta))
}
