//! Reproducible randomness.
//!
//! Every random object is drawn from a ChaCha8 stream (a counter-based
//! generator) keyed by a 64-bit seed. Independent sub-streams are obtained
//! by hashing `(parent seed, label)` with the SplitMix64 finalizer, so a
//! child seed depends only on its ancestry and never on scheduling order:
//!
//! ```text
//! child = splitmix64(parent ^ splitmix64(label + 0x9E3779B97F4A7C15))
//! ```
//!
//! Gaussian variates use the ziggurat sampler of `rand_distr::StandardNormal`.
//! A circularly-symmetric complex Gaussian `CN(0, σ²)` has independent real
//! and imaginary parts, each `N(0, σ²/2)`.

use nalgebra::DVector;
use num_complex::Complex;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::{lit, CVector, Real};

pub type SeededRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for `label` under `parent`.
pub fn derive_seed(parent: u64, label: u64) -> u64 {
    splitmix64(parent ^ splitmix64(label.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

/// Folds a sequence of labels into a seed, e.g. grid coordinates.
pub fn derive_seed_path(parent: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(parent, |acc, &l| derive_seed(acc, l))
}

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One `CN(0, variance)` sample.
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex<T> {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(lit(re * scale), lit(im * scale))
}

/// Vector of i.i.d. `CN(0, variance)` entries.
pub fn complex_gaussian_vector<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    len: usize,
    variance: f64,
) -> CVector<T> {
    DVector::from_iterator(len, (0..len).map(|_| complex_gaussian(rng, variance)))
}

/// Uniform point on the unit sphere of `C^len`.
pub fn complex_sphere<T: Real, R: Rng + ?Sized>(rng: &mut R, len: usize) -> CVector<T> {
    loop {
        let g: CVector<T> = complex_gaussian_vector(rng, len, 1.0);
        let n = g.norm();
        if n > T::zero() {
            return g.unscale(n);
        }
    }
}

/// Uniformly random `k`-subset of `0..n`, sorted.
pub fn random_subset<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut idx = index::sample(rng, n, k).into_vec();
    idx.sort_unstable();
    idx
}
