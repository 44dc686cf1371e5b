//! Dense complex primitives shared by the solvers: hard thresholding, sparse
//! norms, coordinate projections, the leading singular pair and subspace
//! angles.

use std::cmp::Ordering;

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::scalar::{abs2, czero, CMatrix, CVector, Real};

/// Default absolute tolerance for unit-scale data.
pub const DEFAULT_TOL: f64 = 1e-10;

/// A set of 0-based coordinates within `0..universe`, stored in increasing
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexSet {
    indices: Vec<usize>,
    universe: usize,
}

impl IndexSet {
    /// Builds a set from indices in any order. Duplicates and indices outside
    /// the universe are rejected.
    pub fn new(mut indices: Vec<usize>, universe: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return invalid("index set contains duplicate indices");
        }
        if let Some(&last) = indices.last() {
            if last >= universe {
                return invalid(format!("index {last} out of range for universe {universe}"));
            }
        }
        Ok(Self { indices, universe })
    }

    /// `{0, .., n-1}`.
    pub fn full(universe: usize) -> Self {
        Self {
            indices: (0..universe).collect(),
            universe,
        }
    }

    pub fn empty(universe: usize) -> Self {
        Self {
            indices: Vec::new(),
            universe,
        }
    }

    pub(crate) fn from_sorted(indices: Vec<usize>, universe: usize) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(indices.last().is_none_or(|&i| i < universe));
        Self { indices, universe }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Membership mask of length `universe`.
    pub fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.universe];
        for &i in &self.indices {
            mask[i] = true;
        }
        mask
    }

    pub fn complement(&self) -> Self {
        let mask = self.mask();
        let indices = (0..self.universe).filter(|&i| !mask[i]).collect();
        Self {
            indices,
            universe: self.universe,
        }
    }
}

/// Indices of the `k` largest values, returned in increasing index order.
/// Equal values are resolved in favour of the lower index.
pub fn top_indices<T: Real>(values: &[T], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    order.truncate(k.min(values.len()));
    order.sort_unstable();
    order
}

/// Support of `H_s(x)`: the `s` largest-magnitude coordinates, excluding
/// coordinates that are exactly zero.
pub fn threshold_support<T: Real>(x: &CVector<T>, s: usize) -> Result<IndexSet> {
    if s == 0 {
        return invalid("sparsity level must be at least 1");
    }
    let mags: Vec<T> = x.iter().map(|z| abs2(*z)).collect();
    let keep = top_indices(&mags, s)
        .into_iter()
        .filter(|&i| mags[i] > T::zero())
        .collect();
    Ok(IndexSet::from_sorted(keep, x.len()))
}

/// Best `s`-term approximation `H_s(x)`: keeps the `s` largest-magnitude
/// entries and zeroes the rest.
pub fn hard_threshold<T: Real>(x: &CVector<T>, s: usize) -> Result<CVector<T>> {
    let support = threshold_support(x, s)?;
    let mut out = CVector::from_element(x.len(), czero());
    for i in support.iter() {
        out[i] = x[i];
    }
    Ok(out)
}

/// The `s`-sparse norm: the l2 norm of `H_s(x)`.
pub fn sparse_norm<T: Real>(x: &CVector<T>, s: usize) -> Result<T> {
    if s == 0 {
        return invalid("sparsity level must be at least 1");
    }
    Ok(sparse_norm_of(x.as_slice(), s))
}

pub(crate) fn sparse_norm_of<T: Real>(entries: &[Complex<T>], s: usize) -> T {
    let mags: Vec<T> = entries.iter().map(|z| abs2(*z)).collect();
    top_indices(&mags, s)
        .into_iter()
        .fold(T::zero(), |acc, i| acc + mags[i])
        .sqrt()
}

fn check_axis(set: &IndexSet, len: usize, what: &str) -> Result<()> {
    if set.universe() != len {
        return invalid(format!(
            "index set universe {} does not match {what} length {len}",
            set.universe()
        ));
    }
    Ok(())
}

/// Coordinate projection `Π_J x` (or `Π_J^⊥ x` with `complement`).
pub fn project_vector<T: Real>(
    x: &CVector<T>,
    set: &IndexSet,
    complement: bool,
) -> Result<CVector<T>> {
    check_axis(set, x.len(), "vector")?;
    let mask = set.mask();
    let mut out = x.clone();
    for (i, z) in out.iter_mut().enumerate() {
        if mask[i] == complement {
            *z = czero();
        }
    }
    Ok(out)
}

/// Row projection `Π_J M`: zeroes every row outside `J` (inside with
/// `complement`).
pub fn project_rows<T: Real>(
    m: &CMatrix<T>,
    set: &IndexSet,
    complement: bool,
) -> Result<CMatrix<T>> {
    check_axis(set, m.nrows(), "row")?;
    let mask = set.mask();
    let mut out = m.clone();
    for (i, keep) in mask.iter().enumerate() {
        if *keep == complement {
            out.row_mut(i).fill(czero());
        }
    }
    Ok(out)
}

/// Column projection `M Π_J`.
pub fn project_cols<T: Real>(
    m: &CMatrix<T>,
    set: &IndexSet,
    complement: bool,
) -> Result<CMatrix<T>> {
    check_axis(set, m.ncols(), "column")?;
    let mask = set.mask();
    let mut out = m.clone();
    for (j, keep) in mask.iter().enumerate() {
        if *keep == complement {
            out.column_mut(j).fill(czero());
        }
    }
    Ok(out)
}

/// Submatrix on the given rows and columns.
pub fn submatrix<T: Real>(m: &CMatrix<T>, rows: &[usize], cols: &[usize]) -> CMatrix<T> {
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Largest singular value with unit-norm singular vectors.
#[derive(Debug, Clone)]
pub struct LeadingPair<T: Real> {
    pub sigma: T,
    pub u: CVector<T>,
    pub v: CVector<T>,
}

/// Leading singular triple of `m`, so that `m v = sigma u`.
pub fn leading_pair<T: Real>(m: &CMatrix<T>) -> Result<LeadingPair<T>> {
    if m.iter().all(|z| abs2(*z) == T::zero()) {
        return Err(Error::DegenerateInput(
            "leading singular pair of an all-zero matrix".into(),
        ));
    }
    let svd = m.clone().svd(true, true);
    let (u_all, vt_all) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => {
            return Err(Error::DegenerateInput(
                "SVD did not return singular vectors".into(),
            ))
        }
    };
    let idx = svd.singular_values.imax();
    Ok(LeadingPair {
        sigma: svd.singular_values[idx],
        u: u_all.column(idx).into_owned(),
        v: vt_all.row(idx).adjoint(),
    })
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(m: &CMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    m.clone().singular_values().max()
}

/// Sine of the principal angle between `span(a)` and `span(b)`.
///
/// Evaluated as the norm of the component of `b/‖b‖` orthogonal to `a`, which
/// keeps full relative accuracy for nearly aligned vectors.
pub fn subspace_sin<T: Real>(a: &CVector<T>, b: &CVector<T>) -> Result<T> {
    if a.len() != b.len() {
        return invalid("subspace_sin: length mismatch");
    }
    let na = a.norm();
    let nb = b.norm();
    if na == T::zero() || nb == T::zero() {
        return Err(Error::DegenerateInput(
            "subspace angle with a zero vector".into(),
        ));
    }
    let a = a.unscale(na);
    let b = b.unscale(nb);
    let coef = a.dotc(&b);
    let resid = &b - &a * coef;
    Ok(resid.norm().min(T::one()))
}

/// Hermitian inner product `⟨a, b⟩ = a^* b` for matrices (`trace(a^* b)`).
pub fn mat_inner<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Complex<T> {
    a.iter()
        .zip(b.iter())
        .fold(czero(), |acc, (x, y)| acc + x.conj() * y)
}

/// `u v^*`.
pub fn outer<T: Real>(u: &CVector<T>, v: &CVector<T>) -> CMatrix<T> {
    u * v.adjoint()
}

/// Number of nonzero entries.
pub fn nnz<T: Real>(x: &CVector<T>) -> usize {
    x.iter().filter(|z| abs2(**z) != T::zero()).count()
}
