//! Seeded random streams. Every instance of a suite draws from its own
//! ChaCha stream so results do not depend on scheduling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type StreamRng = ChaCha8Rng;

/// Returns the RNG for stream `stream` under master seed `seed`.
pub fn stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn normal(rng: &mut StreamRng) -> f64 {
    rng.sample(StandardNormal)
}

/// Standard complex Gaussian with independent N(0,1) real and imaginary parts.
pub fn complex_normal(rng: &mut StreamRng) -> Complex64 {
    Complex64::new(normal(rng), normal(rng))
}

pub fn uniform(rng: &mut StreamRng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}
