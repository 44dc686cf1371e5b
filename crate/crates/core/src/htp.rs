//! Hard thresholding pursuit and the dense least-squares kernels behind it.

use crate::error::{invalid, Result};
use crate::linalg::{threshold_support, IndexSet};
use crate::scalar::{abs2, czero, lit, CMatrix, CVector, Real};
use crate::theory::htp_constants;

/// Relative rank tolerance of the pivoted QR used for least squares.
pub const RANK_TOL: f64 = 1e-12;

/// RIP constant assumed when no inner iteration budget is supplied.
pub const DEFAULT_BUDGET_DELTA: f64 = 0.08;

/// When HTP stops iterating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopRule {
    /// Stop as soon as the selected support repeats, or at the budget.
    #[default]
    SupportStable,
    /// Always run the full iteration budget.
    BudgetOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HtpConfig {
    pub sparsity: usize,
    pub gamma: f64,
    pub max_iters: usize,
    pub stop: StopRule,
}

impl HtpConfig {
    /// Unit step, support-stability stop, budget from [`htp_iteration_budget`]
    /// at the default RIP constant.
    pub fn new(sparsity: usize) -> Self {
        let max_iters = htp_iteration_budget(sparsity.max(1), DEFAULT_BUDGET_DELTA).unwrap_or(1);
        Self {
            sparsity,
            gamma: 1.0,
            max_iters,
            stop: StopRule::SupportStable,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.sparsity == 0 {
            return invalid("HTP sparsity must be at least 1");
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return invalid("HTP step size must be positive");
        }
        if self.max_iters == 0 {
            return invalid("HTP needs at least one iteration");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct HtpResult<T: Real> {
    pub x_hat: CVector<T>,
    pub iterations: usize,
    /// `supp(x_hat)`.
    pub support: IndexSet,
    pub residual_norm: T,
    /// Some restricted least-squares step was rank deficient and was solved in
    /// the minimum-norm sense.
    pub rank_deficient: bool,
    /// The support repeated before the budget ran out.
    pub support_stable: bool,
}

/// Hard thresholding pursuit from `x_0 = 0`:
///
/// ```text
/// J_t = supp H_s[x_{t-1} + γ Φ^*(b - Φ x_{t-1})]
/// x_t = argmin { ‖b - Φ x‖ : supp x ⊂ J_t }
/// ```
pub fn htp<T: Real>(phi: &CMatrix<T>, b: &CVector<T>, cfg: &HtpConfig) -> Result<HtpResult<T>> {
    cfg.validate()?;
    let (m, n) = phi.shape();
    if b.len() != m {
        return invalid(format!(
            "htp: measurement length {} does not match {m} rows",
            b.len()
        ));
    }
    let gamma: T = lit(cfg.gamma);
    let mut x = CVector::from_element(n, czero());
    let mut support = IndexSet::empty(n);
    let mut resid = b.clone();
    let mut rank_deficient = false;
    let mut support_stable = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        iterations += 1;
        let proxy = &x + phi.ad_mul(&resid) * crate::scalar::from_real(gamma);
        let next = threshold_support(&proxy, cfg.sparsity)?;
        if next == support && cfg.stop == StopRule::SupportStable {
            support_stable = true;
            break;
        }
        let (x_new, deficient) = restricted_lstsq(phi, b, &next);
        rank_deficient |= deficient;
        x = x_new;
        resid = b - phi * &x;
        support = next;
    }

    let support = IndexSet::from_sorted((0..n).filter(|&i| x[i] != czero()).collect(), n);
    let residual_norm = resid.norm();
    Ok(HtpResult {
        x_hat: x,
        iterations,
        support,
        residual_norm,
        rank_deficient,
        support_stable,
    })
}

/// Minimizer of `‖b - Φ x‖₂`; the minimum-norm minimizer when `Φ` does not
/// have full column rank.
pub fn least_squares<T: Real>(phi: &CMatrix<T>, b: &CVector<T>) -> Result<CVector<T>> {
    if b.len() != phi.nrows() {
        return invalid("least_squares: right-hand side length mismatch");
    }
    Ok(solve_least_squares(phi, b).0)
}

/// Least squares restricted to the columns in `support`, scattered back to a
/// length-`n` vector. The flag reports a rank-deficient restriction.
pub fn restricted_least_squares<T: Real>(
    phi: &CMatrix<T>,
    b: &CVector<T>,
    support: &IndexSet,
) -> Result<(CVector<T>, bool)> {
    if b.len() != phi.nrows() || support.universe() != phi.ncols() {
        return invalid("restricted_least_squares: shape mismatch");
    }
    Ok(restricted_lstsq(phi, b, support))
}

fn restricted_lstsq<T: Real>(
    phi: &CMatrix<T>,
    b: &CVector<T>,
    support: &IndexSet,
) -> (CVector<T>, bool) {
    let n = phi.ncols();
    let mut x = CVector::from_element(n, czero());
    if support.is_empty() {
        return (x, false);
    }
    let cols = support.as_slice();
    let sub = phi.select_columns(cols);
    let (coef, deficient) = solve_least_squares(&sub, b);
    for (c, &i) in coef.iter().zip(cols) {
        x[i] = *c;
    }
    (x, deficient)
}

/// Column-pivoted QR solve; falls back to an SVD pseudo-inverse when the
/// numerical rank (relative to `|R_00|`) is below the column count.
pub(crate) fn solve_least_squares<T: Real>(phi: &CMatrix<T>, b: &CVector<T>) -> (CVector<T>, bool) {
    let (m, n) = phi.shape();
    if n == 0 {
        return (CVector::zeros(0), false);
    }
    if m >= n {
        let qr = phi.clone().col_piv_qr();
        let r = qr.r();
        let r00 = abs2(r[(0, 0)]).sqrt();
        let tol = r00 * lit::<T>(RANK_TOL);
        let full_rank = r00 > T::zero() && (0..n).all(|k| abs2(r[(k, k)]).sqrt() > tol);
        if full_rank {
            let mut y = qr.q().ad_mul(b);
            let solved = r.solve_upper_triangular_mut(&mut y);
            if solved && y.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                qr.p().inv_permute_rows(&mut y);
                return (y, false);
            }
        }
    }
    (min_norm_solve(phi, b), true)
}

fn min_norm_solve<T: Real>(phi: &CMatrix<T>, b: &CVector<T>) -> CVector<T> {
    let svd = phi.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if smax == T::zero() {
        return CVector::from_element(phi.ncols(), czero());
    }
    let eps = smax * lit::<T>(RANK_TOL);
    svd.solve(b, eps)
        .map(|x| x.column(0).into_owned())
        .unwrap_or_else(|_| CVector::from_element(phi.ncols(), czero()))
}

/// Inner iteration budget `⌈L_δ + K_δ·s⌉` for HTP on an `s`-sparse problem.
pub fn htp_iteration_budget(s: usize, delta: f64) -> Result<usize> {
    let c = htp_constants(delta)?;
    Ok((c.l as f64 + c.k * s as f64).ceil() as usize)
}
