//! Test-only reference implementations, independent of the library code paths.
#![allow(dead_code)]

pub mod bessel_oracle;
pub mod cases;
pub mod winding_oracle;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 20_261_019;

pub fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    r.set_stream(stream);
    r
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Relative error, or absolute error at scale `max(1, |b|)` when that is smaller.
pub fn within(a: Complex64, b: Complex64, rel: f64, abs: f64) -> bool {
    let e = (a - b).norm();
    e <= rel * b.norm() || e <= abs * b.norm().max(1.0)
}

pub fn uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    r.gen_range(lo..hi)
}
