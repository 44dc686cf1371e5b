//! Ground-truth sparse rank-one signals `X = λ u v^*`.

use crate::error::{invalid, Result};
use crate::linalg::{nnz, IndexSet};
use crate::random::{complex_sphere, random_subset, rng_from_seed};
use crate::scalar::{czero, lit, CMatrix, CVector, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseRankOneModel<T: Real> {
    pub lambda: T,
    pub u: CVector<T>,
    pub v: CVector<T>,
    pub s1: usize,
    pub s2: usize,
}

impl<T: Real> SparseRankOneModel<T> {
    /// Validates unit norms (to 1e-12), declared sparsities and `λ > 0`.
    pub fn new(lambda: T, u: CVector<T>, v: CVector<T>, s1: usize, s2: usize) -> Result<Self> {
        let tol = lit::<T>(1e-12);
        if !(lambda > T::zero()) {
            return invalid("lambda must be positive");
        }
        if (u.norm() - T::one()).abs() > tol || (v.norm() - T::one()).abs() > tol {
            return invalid("factors must have unit norm");
        }
        if nnz(&u) > s1 || nnz(&v) > s2 {
            return invalid("factor support exceeds declared sparsity");
        }
        Ok(Self {
            lambda,
            u,
            v,
            s1,
            s2,
        })
    }

    pub fn n1(&self) -> usize {
        self.u.len()
    }

    pub fn n2(&self) -> usize {
        self.v.len()
    }

    /// `λ u v^*`.
    pub fn matrix(&self) -> CMatrix<T> {
        (&self.u * self.v.adjoint()).scale(self.lambda)
    }

    pub fn row_support(&self) -> IndexSet {
        support_of(&self.u)
    }

    pub fn col_support(&self) -> IndexSet {
        support_of(&self.v)
    }
}

fn support_of<T: Real>(x: &CVector<T>) -> IndexSet {
    IndexSet::new((0..x.len()).filter(|&i| x[i] != czero()).collect(), x.len())
        .expect("indices are in range and distinct")
}

/// Draws supports uniformly among `s`-subsets and the nonzero entries
/// uniformly on the complex unit sphere of the support; `λ = 1`.
pub fn random_sparse_rank_one<T: Real>(
    n1: usize,
    n2: usize,
    s1: usize,
    s2: usize,
    seed: u64,
) -> Result<SparseRankOneModel<T>> {
    if s1 == 0 || s1 > n1 || s2 == 0 || s2 > n2 {
        return invalid(format!(
            "sparsities must satisfy 1 <= s1 <= n1, 1 <= s2 <= n2; got ({s1}, {s2}) for ({n1}, {n2})"
        ));
    }
    let mut rng = rng_from_seed(seed);
    let mut draw = |n: usize, s: usize| {
        let support = random_subset(&mut rng, n, s);
        let values: CVector<T> = complex_sphere(&mut rng, s);
        let mut x = CVector::from_element(n, czero());
        for (val, &i) in values.iter().zip(&support) {
            x[i] = *val;
        }
        x
    };
    let u = draw(n1, s1);
    let v = draw(n2, s2);
    Ok(SparseRankOneModel {
        lambda: T::one(),
        u,
        v,
        s1,
        s2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_satisfy_invariants() {
        for seed in 0..2000 {
            let m = random_sparse_rank_one::<f64>(12, 7, 3, 2, seed).unwrap();
            assert!((m.u.norm() - 1.0).abs() <= 1e-12);
            assert!((m.v.norm() - 1.0).abs() <= 1e-12);
            assert!(nnz(&m.u) <= 3 && nnz(&m.v) <= 2);
            assert_eq!(m.lambda, 1.0);
        }
    }

    #[test]
    fn full_sparsity_gives_full_support() {
        let m = random_sparse_rank_one::<f64>(9, 4, 9, 4, 3).unwrap();
        assert_eq!(m.row_support(), IndexSet::full(9));
        assert_eq!(m.col_support(), IndexSet::full(4));
    }

    #[test]
    fn invalid_sparsity_rejected() {
        assert!(random_sparse_rank_one::<f64>(4, 4, 0, 1, 0).is_err());
        assert!(random_sparse_rank_one::<f64>(4, 4, 5, 1, 0).is_err());
        assert!(random_sparse_rank_one::<f64>(4, 4, 1, 5, 0).is_err());
    }

    #[test]
    fn support_inclusion_frequency_is_uniform() {
        let (n1, s1, draws) = (10usize, 3usize, 10_000u64);
        let mut counts = vec![0u32; n1];
        for seed in 0..draws {
            let m = random_sparse_rank_one::<f64>(n1, 2, s1, 1, seed).unwrap();
            for i in m.row_support().iter() {
                counts[i] += 1;
            }
        }
        let p = s1 as f64 / n1 as f64;
        let mean = draws as f64 * p;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!(
                (c as f64 - mean).abs() <= 3.0 * sd,
                "count {c}, mean {mean}"
            );
        }
    }
}
