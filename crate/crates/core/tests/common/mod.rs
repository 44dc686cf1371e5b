#![allow(dead_code)]

use spf_core::random::{complex_gaussian_vector, rng_from_seed};
use spf_core::scalar::cplx;
use spf_core::{CMat, CVec};

pub fn random_vector(len: usize, seed: u64) -> CVec {
    let mut rng = rng_from_seed(seed);
    complex_gaussian_vector(&mut rng, len, 1.0)
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMat {
    let v = random_vector(rows * cols, seed);
    CMat::from_column_slice(rows, cols, v.as_slice())
}

pub fn real_matrix(rows: &[&[f64]]) -> CMat {
    CMat::from_fn(rows.len(), rows[0].len(), |i, j| cplx(rows[i][j], 0.0))
}

/// All subsets of `0..n` of size `k`, as sorted index lists, in bitmask order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << n))
        .filter(|mask| mask.count_ones() as usize == k)
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect()
}

/// Largest eigenpair of the Hermitian matrix `m^* m`: squared spectral norm
/// and the leading right singular vector.
pub fn gram_top(m: &CMat) -> (f64, CVec) {
    let gram = m.adjoint() * m;
    let eig = gram.symmetric_eigen();
    let idx = eig.eigenvalues.imax();
    (
        eig.eigenvalues[idx],
        eig.eigenvectors.column(idx).into_owned(),
    )
}

/// `1 - |<a, b>| / (‖a‖‖b‖)`, zero iff the vectors agree up to phase.
pub fn phase_gap(a: &CVec, b: &CVec) -> f64 {
    1.0 - a.dotc(b).norm() / (a.norm() * b.norm())
}
