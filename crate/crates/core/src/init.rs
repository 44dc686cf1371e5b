//! Initial right factors computed from the proxy matrix `A*(b)`.

use std::cmp::Ordering;

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    leading_pair, project_cols, project_rows, sparse_norm_of, spectral_norm, submatrix,
    top_indices, IndexSet,
};
use crate::operator::MeasurementOperator;
use crate::scalar::{abs2, czero, CMatrix, CVector, Real};

/// Default cap on the number of support candidates examined exhaustively.
pub const DEFAULT_COMBINATORIAL_BUDGET: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMethod {
    Optimal,
    Thresholding,
    RowSparseSpectral,
    RowSparseFrobenius,
    PfProxy,
}

impl InitMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            InitMethod::Optimal => "optimal",
            InitMethod::Thresholding => "thresh",
            InitMethod::RowSparseSpectral => "rowsparse-s",
            InitMethod::RowSparseFrobenius => "rowsparse-f",
            InitMethod::PfProxy => "proxy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowNorm {
    Spectral,
    Frobenius,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitResult<T: Real> {
    /// Unit-norm initial right factor.
    pub v0: CVector<T>,
    pub j1_hat: IndexSet,
    pub j2_hat: IndexSet,
    pub method: InitMethod,
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) is exact at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(x) => x / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// The proxy matrix `A*(b)`.
pub fn proxy_matrix<T: Real>(op: &MeasurementOperator<T>, b: &CVector<T>) -> Result<CMatrix<T>> {
    op.adjoint(b)
}

fn nonzero_proxy<T: Real>(p: &CMatrix<T>) -> Result<()> {
    if p.iter().all(|z| abs2(*z) == T::zero()) {
        return Err(Error::DegenerateInput("proxy matrix A*(b) is zero".into()));
    }
    Ok(())
}

fn check_sparsity(s1: usize, s2: usize, n1: usize, n2: usize) -> Result<()> {
    if s1 == 0 || s1 > n1 || s2 == 0 || s2 > n2 {
        return invalid(format!(
            "sparsities must satisfy 1 <= s1 <= {n1}, 1 <= s2 <= {n2}; got ({s1}, {s2})"
        ));
    }
    Ok(())
}

fn check_budget(count: u128, budget: u128) -> Result<()> {
    if count > budget {
        return Err(Error::CombinatorialBudget { count, budget });
    }
    Ok(())
}

/// Keeps the candidate with the larger score; exact ties go to the earlier
/// candidate in enumeration order.
fn better<K: Ord, T: Real>(a: (K, T), b: (K, T)) -> (K, T) {
    match b.1.partial_cmp(&a.1) {
        Some(Ordering::Greater) => b,
        Some(Ordering::Less) => a,
        _ => {
            if b.0 < a.0 {
                b
            } else {
                a
            }
        }
    }
}

fn restricted_v0<T: Real>(p: &CMatrix<T>, j1: &IndexSet, j2: &IndexSet) -> Result<CVector<T>> {
    let restricted = project_cols(&project_rows(p, j1, false)?, j2, false)?;
    Ok(leading_pair(&restricted)?.v)
}

/// Number of support pairs `init_optimal` would examine.
pub fn optimal_candidate_count(n1: usize, n2: usize, s1: usize, s2: usize) -> u128 {
    binomial(n1, s1).saturating_mul(binomial(n2, s2))
}

/// Exhaustive search for the `s1 x s2` restriction of `A*(b)` with the largest
/// spectral norm; `v0` is its leading right singular vector.
pub fn init_optimal<T: Real>(
    op: &MeasurementOperator<T>,
    b: &CVector<T>,
    s1: usize,
    s2: usize,
    budget: u128,
) -> Result<InitResult<T>> {
    let (_, n1, n2) = op.dims();
    check_sparsity(s1, s2, n1, n2)?;
    check_budget(optimal_candidate_count(n1, n2, s1, s2), budget)?;
    let p = proxy_matrix(op, b)?;
    nonzero_proxy(&p)?;

    let rows: Vec<Vec<usize>> = (0..n1).combinations(s1).collect();
    let cols: Vec<Vec<usize>> = (0..n2).combinations(s2).collect();
    let best = rows
        .par_iter()
        .enumerate()
        .map(|(ri, r)| {
            let mut local: Option<((usize, usize), T)> = None;
            for (ci, c) in cols.iter().enumerate() {
                let cand = ((ri, ci), spectral_norm(&submatrix(&p, r, c)));
                local = Some(match local {
                    None => cand,
                    Some(cur) => better(cur, cand),
                });
            }
            local.expect("at least one column subset")
        })
        .reduce_with(better)
        .expect("at least one row subset");
    let ((ri, ci), _) = best;
    let j1 = IndexSet::new(rows[ri].clone(), n1)?;
    let j2 = IndexSet::new(cols[ci].clone(), n2)?;
    let v0 = restricted_v0(&p, &j1, &j2)?;
    Ok(InitResult {
        v0,
        j1_hat: j1,
        j2_hat: j2,
        method: InitMethod::Optimal,
    })
}

/// Projection onto matrices with at most `s1` nonzero rows, each at most
/// `s2`-sparse. Returns the projection and the kept rows.
///
/// Rows are ranked by their `s2`-sparse norm; each kept row is replaced by its
/// best `s2`-term approximation. Ties go to the lower index.
pub fn project_sparse_rows<T: Real>(
    p: &CMatrix<T>,
    s1: usize,
    s2: usize,
) -> Result<(CMatrix<T>, IndexSet)> {
    let (n1, n2) = p.shape();
    check_sparsity(s1, s2, n1, n2)?;
    let rows: Vec<Vec<_>> = (0..n1)
        .map(|i| p.row(i).iter().copied().collect())
        .collect();
    let scores: Vec<T> = rows.iter().map(|r| sparse_norm_of(r, s2)).collect();
    let j1 = IndexSet::new(top_indices(&scores, s1), n1)?;
    let mut out = CMatrix::from_element(n1, n2, czero());
    for i in j1.iter() {
        let mags: Vec<T> = rows[i].iter().map(|z| abs2(*z)).collect();
        for k in top_indices(&mags, s2) {
            out[(i, k)] = rows[i][k];
        }
    }
    Ok((out, j1))
}

fn column_norms<T: Real>(p: &CMatrix<T>) -> Vec<T> {
    p.column_iter().map(|c| c.norm()).collect()
}

fn row_norms<T: Real>(p: &CMatrix<T>) -> Vec<T> {
    p.row_iter().map(|r| r.norm()).collect()
}

/// Thresholding initialization: project the proxy onto the doubly sparse set,
/// keep its `s2` heaviest columns and take the leading right singular vector.
pub fn init_thresholding<T: Real>(
    op: &MeasurementOperator<T>,
    b: &CVector<T>,
    s1: usize,
    s2: usize,
) -> Result<InitResult<T>> {
    let (_, n1, n2) = op.dims();
    check_sparsity(s1, s2, n1, n2)?;
    let p = proxy_matrix(op, b)?;
    nonzero_proxy(&p)?;
    let (ps, j1) = project_sparse_rows(&p, s1, s2)?;
    let j2 = IndexSet::new(top_indices(&column_norms(&ps), s2), n2)?;
    let v0 = leading_pair(&project_cols(&ps, &j2, false)?)?.v;
    Ok(InitResult {
        v0,
        j1_hat: j1,
        j2_hat: j2,
        method: InitMethod::Thresholding,
    })
}

/// Row-sparse initialization: choose `s1` rows of the proxy by spectral norm
/// (exhaustive, budgeted) or Frobenius norm (sorting).
pub fn init_rowsparse<T: Real>(
    op: &MeasurementOperator<T>,
    b: &CVector<T>,
    s1: usize,
    norm: RowNorm,
    budget: u128,
) -> Result<InitResult<T>> {
    let (_, n1, n2) = op.dims();
    check_sparsity(s1, n2, n1, n2)?;
    let p = proxy_matrix(op, b)?;
    nonzero_proxy(&p)?;
    let (rows, method) = match norm {
        RowNorm::Frobenius => (
            top_indices(&row_norms(&p), s1),
            InitMethod::RowSparseFrobenius,
        ),
        RowNorm::Spectral => {
            check_budget(binomial(n1, s1), budget)?;
            let all_cols: Vec<usize> = (0..n2).collect();
            let cands: Vec<Vec<usize>> = (0..n1).combinations(s1).collect();
            let (best, _) = cands
                .par_iter()
                .enumerate()
                .map(|(i, r)| (i, spectral_norm(&submatrix(&p, r, &all_cols))))
                .reduce_with(better)
                .expect("at least one row subset");
            (cands[best].clone(), InitMethod::RowSparseSpectral)
        }
    };
    let j1 = IndexSet::new(rows, n1)?;
    let j2 = IndexSet::full(n2);
    let v0 = restricted_v0(&p, &j1, &j2)?;
    Ok(InitResult {
        v0,
        j1_hat: j1,
        j2_hat: j2,
        method,
    })
}

/// Leading right singular vector of the full proxy.
pub fn init_pf_proxy<T: Real>(
    op: &MeasurementOperator<T>,
    b: &CVector<T>,
) -> Result<InitResult<T>> {
    let (_, n1, n2) = op.dims();
    let p = proxy_matrix(op, b)?;
    nonzero_proxy(&p)?;
    Ok(InitResult {
        v0: leading_pair(&p)?.v,
        j1_hat: IndexSet::full(n1),
        j2_hat: IndexSet::full(n2),
        method: InitMethod::PfProxy,
    })
}
