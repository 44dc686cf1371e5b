//! Convex basis-pursuit baselines solved with ADMM.
//!
//! `LR` (nuclear norm) and `RS` (row-wise mixed norm) use the two-block
//! splitting `Z ∈ {A(Z) = b}`, `W = Z`. The oracle-weighted variants minimize
//! a maximum of normalized norms and are solved in epigraph form,
//!
//! ```text
//! minimize t  subject to  ‖Z‖_i ≤ w_i t  for each norm i,  A(Z) = b,
//! ```
//!
//! by consensus ADMM over one copy of `(Z, t)` per cone plus one copy for the
//! objective and the affine constraint.

use nalgebra::Cholesky;

use crate::error::{invalid, Error, Result};
use crate::operator::MeasurementOperator;
use crate::scalar::{from_real, lit, CMatrix, CVector, Real};

/// Ridge added to a numerically singular Gram matrix.
pub const GRAM_RIDGE: f64 = 1e-12;

const BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmConfig {
    pub penalty: f64,
    pub max_iters: usize,
    pub primal_tol: f64,
    pub dual_tol: f64,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            penalty: 1.0,
            max_iters: 2000,
            primal_tol: 1e-6,
            dual_tol: 1e-6,
        }
    }
}

impl AdmmConfig {
    fn validate(&self) -> Result<()> {
        if !(self.penalty > 0.0) || !(self.primal_tol > 0.0) || !(self.dual_tol > 0.0) {
            return invalid("ADMM penalty and tolerances must be positive");
        }
        if self.max_iters == 0 {
            return invalid("ADMM needs at least one iteration");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BpVariant {
    /// Nuclear norm.
    LR,
    /// Sum of row norms.
    RS,
    /// Row-sparse and low-rank, oracle weighted.
    RSLR,
    /// Row- and column-sparse, oracle weighted.
    DS,
    /// Row-sparse, column-sparse and low-rank, oracle weighted.
    DSLR,
}

impl BpVariant {
    pub const ALL: [BpVariant; 5] = [
        BpVariant::LR,
        BpVariant::RS,
        BpVariant::RSLR,
        BpVariant::DS,
        BpVariant::DSLR,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BpVariant::LR => "bp-lr",
            BpVariant::RS => "bp-rs",
            BpVariant::RSLR => "bp-rslr",
            BpVariant::DS => "bp-ds",
            BpVariant::DSLR => "bp-dslr",
        }
    }

    fn norms(&self) -> &'static [NormKind] {
        match self {
            BpVariant::LR => &[NormKind::Nuclear],
            BpVariant::RS => &[NormKind::RowL12],
            BpVariant::RSLR => &[NormKind::RowL12, NormKind::Nuclear],
            BpVariant::DS => &[NormKind::RowL12, NormKind::ColL12],
            BpVariant::DSLR => &[NormKind::RowL12, NormKind::ColL12, NormKind::Nuclear],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NormKind {
    Nuclear,
    RowL12,
    ColL12,
}

/// Oracle normalizations `‖X‖_{1,2}`, `‖X^*‖_{1,2}` and `‖X‖_*`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BpWeights<T: Real> {
    pub row_l12: Option<T>,
    pub col_l12: Option<T>,
    pub nuclear: Option<T>,
}

impl<T: Real> BpWeights<T> {
    pub fn from_signal(x: &CMatrix<T>) -> Self {
        Self {
            row_l12: Some(row_l12_norm(x)),
            col_l12: Some(col_l12_norm(x)),
            nuclear: Some(nuclear_norm(x)),
        }
    }

    fn get(&self, kind: NormKind) -> Option<T> {
        match kind {
            NormKind::Nuclear => self.nuclear,
            NormKind::RowL12 => self.row_l12,
            NormKind::ColL12 => self.col_l12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BpProblem<'a, T: Real> {
    pub op: &'a MeasurementOperator<T>,
    pub b: CVector<T>,
    pub weights: BpWeights<T>,
}

#[derive(Debug, Clone)]
pub struct BpResult<T: Real> {
    pub z: CMatrix<T>,
    pub converged: bool,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// The Gram system needed a ridge to factor.
    pub ridge: bool,
}

pub fn nuclear_norm<T: Real>(z: &CMatrix<T>) -> T {
    if z.is_empty() {
        return T::zero();
    }
    z.clone().singular_values().sum()
}

/// `‖Z‖_{1,2}`: sum of row norms.
pub fn row_l12_norm<T: Real>(z: &CMatrix<T>) -> T {
    z.row_iter().fold(T::zero(), |acc, r| acc + r.norm())
}

/// `‖Z^*‖_{1,2}`: sum of column norms.
pub fn col_l12_norm<T: Real>(z: &CMatrix<T>) -> T {
    z.column_iter().fold(T::zero(), |acc, c| acc + c.norm())
}

fn check_threshold<T: Real>(t: T) -> Result<()> {
    if !(t >= T::zero()) {
        return invalid("proximal threshold must be nonnegative");
    }
    Ok(())
}

/// Singular value soft-thresholding by `t`.
pub fn prox_nuclear<T: Real>(z: &CMatrix<T>, t: T) -> Result<CMatrix<T>> {
    check_threshold(t)?;
    Ok(shrink_spectrum(z, |s| (s - t).max(T::zero())))
}

fn shrink_spectrum<T: Real>(z: &CMatrix<T>, f: impl Fn(T) -> T) -> CMatrix<T> {
    if z.is_empty() {
        return z.clone();
    }
    let svd = z.clone().svd(true, true);
    let mut u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    for (i, s) in svd.singular_values.iter().enumerate() {
        let scaled = f(*s);
        u.column_mut(i).scale_mut(scaled);
    }
    u * v_t
}

/// Row-wise group soft-thresholding: row `r` becomes `max(0, 1 - t/‖r‖) r`.
pub fn prox_row_l12<T: Real>(z: &CMatrix<T>, t: T) -> Result<CMatrix<T>> {
    check_threshold(t)?;
    let mut out = z.clone();
    for mut row in out.row_iter_mut() {
        let n = row.norm();
        let keep = if n > t { T::one() - t / n } else { T::zero() };
        row.scale_mut(keep);
    }
    Ok(out)
}

/// Column-wise group soft-thresholding.
pub fn prox_col_l12<T: Real>(z: &CMatrix<T>, t: T) -> Result<CMatrix<T>> {
    Ok(prox_row_l12(&z.adjoint(), t)?.adjoint())
}

/// Orthogonal projection onto `{Z : A(Z) = b}` with a cached factorization of
/// the Gram matrix `A A^*`.
#[derive(Debug, Clone)]
pub struct AffineProjector<'a, T: Real> {
    op: &'a MeasurementOperator<T>,
    chol: Cholesky<num_complex::Complex<T>, nalgebra::Dyn>,
    ridge: bool,
}

impl<'a, T: Real> AffineProjector<'a, T> {
    pub fn new(op: &'a MeasurementOperator<T>) -> Result<Self> {
        let gram = op.gram();
        if let Some(chol) = Cholesky::new(gram.clone()) {
            return Ok(Self {
                op,
                chol,
                ridge: false,
            });
        }
        let scale = (0..gram.nrows())
            .map(|i| gram[(i, i)].re)
            .fold(T::one(), |a, b| a.max(b));
        let mut reg = gram;
        let eps = from_real(lit::<T>(GRAM_RIDGE) * scale);
        for i in 0..reg.nrows() {
            reg[(i, i)] += eps;
        }
        match Cholesky::new(reg) {
            Some(chol) => Ok(Self {
                op,
                chol,
                ridge: true,
            }),
            None => Err(Error::DegenerateInput(
                "Gram matrix could not be factored".into(),
            )),
        }
    }

    /// True when the Gram matrix was regularized.
    pub fn ridge(&self) -> bool {
        self.ridge
    }

    pub fn operator(&self) -> &MeasurementOperator<T> {
        self.op
    }

    /// `Z + A^*(A A^*)^{-1}(b - A(Z))`.
    pub fn project(&self, b: &CVector<T>, z: &CMatrix<T>) -> Result<CMatrix<T>> {
        let r = b - self.op.apply(z)?;
        let w = self.chol.solve(&r);
        Ok(z + self.op.adjoint(&w)?)
    }
}

/// One-shot affine projection.
pub fn project_affine<T: Real>(
    op: &MeasurementOperator<T>,
    b: &CVector<T>,
    z: &CMatrix<T>,
) -> Result<CMatrix<T>> {
    AffineProjector::new(op)?.project(b, z)
}

/// Soft-threshold level `θ` projecting `a ≥ 0` onto the l1 ball of radius `r`.
fn l1_ball_threshold<T: Real>(a: &[T], r: T) -> T {
    let total = a.iter().fold(T::zero(), |s, x| s + *x);
    if total <= r {
        return T::zero();
    }
    let mut sorted = a.to_vec();
    sorted.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    let mut cum = T::zero();
    let mut theta = T::zero();
    for (i, x) in sorted.iter().enumerate() {
        cum += *x;
        let cand = (cum - r) / lit::<T>((i + 1) as f64);
        if *x > cand {
            theta = cand;
        } else {
            break;
        }
    }
    theta.max(T::zero())
}

/// Decomposition of a matrix into a nonnegative profile `a` (singular values,
/// row norms or column norms) whose l1 norm is the matrix norm, together with
/// the means to rebuild the matrix from a modified profile.
struct Profile<T: Real> {
    kind: NormKind,
    a: Vec<T>,
    u: Option<CMatrix<T>>,
    v_t: Option<CMatrix<T>>,
    base: CMatrix<T>,
}

impl<T: Real> Profile<T> {
    fn new(kind: NormKind, z: &CMatrix<T>) -> Self {
        match kind {
            NormKind::Nuclear => {
                let svd = z.clone().svd(true, true);
                Self {
                    kind,
                    a: svd.singular_values.iter().copied().collect(),
                    u: svd.u,
                    v_t: svd.v_t,
                    base: CMatrix::zeros(0, 0),
                }
            }
            NormKind::RowL12 => Self {
                kind,
                a: z.row_iter().map(|r| r.norm()).collect(),
                u: None,
                v_t: None,
                base: z.clone(),
            },
            NormKind::ColL12 => Self {
                kind,
                a: z.column_iter().map(|c| c.norm()).collect(),
                u: None,
                v_t: None,
                base: z.clone(),
            },
        }
    }

    fn max(&self) -> T {
        self.a.iter().fold(T::zero(), |m, x| m.max(*x))
    }

    fn sum(&self) -> T {
        self.a.iter().fold(T::zero(), |s, x| s + *x)
    }

    /// Matrix with every profile entry `a_i` replaced by `max(a_i - θ, 0)`.
    fn shrink(&self, theta: T) -> CMatrix<T> {
        let f = |x: T| (x - theta).max(T::zero());
        match self.kind {
            NormKind::Nuclear => {
                let mut u = self.u.clone().expect("left singular vectors");
                for (i, s) in self.a.iter().enumerate() {
                    u.column_mut(i).scale_mut(f(*s));
                }
                u * self.v_t.as_ref().expect("right singular vectors")
            }
            NormKind::RowL12 => {
                let mut out = self.base.clone();
                for (i, mut row) in out.row_iter_mut().enumerate() {
                    let n = self.a[i];
                    row.scale_mut(if n > T::zero() { f(n) / n } else { T::zero() });
                }
                out
            }
            NormKind::ColL12 => {
                let mut out = self.base.clone();
                for (i, mut col) in out.column_iter_mut().enumerate() {
                    let n = self.a[i];
                    col.scale_mut(if n > T::zero() { f(n) / n } else { T::zero() });
                }
                out
            }
        }
    }
}

/// Euclidean projection of `(z0, t0)` onto the cone `{(Z, t) : ‖Z‖ ≤ w t}`.
fn project_cone<T: Real>(kind: NormKind, w: T, z0: &CMatrix<T>, t0: T) -> (CMatrix<T>, T) {
    let p = Profile::new(kind, z0);
    let total = p.sum();
    if total <= w * t0 {
        return (z0.clone(), t0);
    }
    if w * p.max() <= -t0 {
        return (CMatrix::zeros(z0.nrows(), z0.ncols()), T::zero());
    }
    // φ'(t) = 2(t - t0) - 2 w θ(w t) is increasing with a root in [lo, hi].
    let two = lit::<T>(2.0);
    let deriv = |t: T| (t - t0) - w * l1_ball_threshold(&p.a, w * t);
    let mut lo = t0.max(T::zero());
    let mut hi = total / w;
    for _ in 0..BISECTION_STEPS {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if deriv(mid) > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t = (lo + hi) / two;
    let theta = l1_ball_threshold(&p.a, w * t);
    (p.shrink(theta), t)
}

fn sq<T: Real>(z: &CMatrix<T>) -> T {
    z.norm_squared()
}

/// Solves the selected basis-pursuit program.
pub fn bp_solve<T: Real>(
    problem: &BpProblem<'_, T>,
    variant: BpVariant,
    cfg: &AdmmConfig,
) -> Result<BpResult<T>> {
    let projector = AffineProjector::new(problem.op)?;
    bp_solve_with(&projector, &problem.b, &problem.weights, variant, cfg)
}

/// Like [`bp_solve`] but reuses a prepared affine projector.
pub fn bp_solve_with<T: Real>(
    projector: &AffineProjector<'_, T>,
    b: &CVector<T>,
    weights: &BpWeights<T>,
    variant: BpVariant,
    cfg: &AdmmConfig,
) -> Result<BpResult<T>> {
    cfg.validate()?;
    if b.len() != projector.op.m() {
        return invalid("measurement length does not match the operator");
    }
    match variant {
        BpVariant::LR => admm_direct(projector, b, NormKind::Nuclear, cfg),
        BpVariant::RS => admm_direct(projector, b, NormKind::RowL12, cfg),
        _ => {
            let mut cones = Vec::new();
            for &kind in variant.norms() {
                match weights.get(kind) {
                    Some(w) if w > T::zero() => cones.push((kind, w)),
                    _ => {
                        return invalid(format!(
                            "{} needs positive oracle weights",
                            variant.as_str()
                        ))
                    }
                }
            }
            admm_epigraph(projector, b, &cones, cfg)
        }
    }
}

fn prox_of<T: Real>(kind: NormKind, z: &CMatrix<T>, t: T) -> CMatrix<T> {
    match kind {
        NormKind::Nuclear => shrink_spectrum(z, |s| (s - t).max(T::zero())),
        NormKind::RowL12 => prox_row_l12(z, t).expect("threshold is nonnegative"),
        NormKind::ColL12 => prox_col_l12(z, t).expect("threshold is nonnegative"),
    }
}

fn admm_direct<T: Real>(
    proj: &AffineProjector<'_, T>,
    b: &CVector<T>,
    kind: NormKind,
    cfg: &AdmmConfig,
) -> Result<BpResult<T>> {
    let (n1, n2) = (proj.op.n1(), proj.op.n2());
    let rho = lit::<T>(cfg.penalty);
    let step = T::one() / rho;
    let tiny = lit::<T>(1e-300);
    let mut w = CMatrix::zeros(n1, n2);
    let mut u = CMatrix::zeros(n1, n2);
    let mut z = proj.project(b, &w)?;
    let (mut r_norm, mut s_norm) = (T::zero(), T::zero());
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=cfg.max_iters {
        iterations = it;
        z = proj.project(b, &(&w - &u))?;
        let w_prev = std::mem::replace(&mut w, prox_of(kind, &(&z + &u), step));
        u += &z - &w;
        r_norm = (&z - &w).norm();
        s_norm = rho * (&w - &w_prev).norm();
        let eps_p = lit::<T>(cfg.primal_tol) * z.norm().max(w.norm()).max(tiny);
        let eps_d = lit::<T>(cfg.dual_tol) * (rho * u.norm()).max(tiny);
        if r_norm <= eps_p && s_norm <= eps_d {
            converged = true;
            break;
        }
    }
    Ok(BpResult {
        z,
        converged,
        iterations,
        primal_residual: crate::scalar::to_f64(r_norm),
        dual_residual: crate::scalar::to_f64(s_norm),
        ridge: proj.ridge,
    })
}

fn admm_epigraph<T: Real>(
    proj: &AffineProjector<'_, T>,
    b: &CVector<T>,
    cones: &[(NormKind, T)],
    cfg: &AdmmConfig,
) -> Result<BpResult<T>> {
    let (n1, n2) = (proj.op.n1(), proj.op.n2());
    let blocks = cones.len() + 1;
    let nb = lit::<T>(blocks as f64);
    let rho = lit::<T>(cfg.penalty);
    let tiny = lit::<T>(1e-300);

    let mut zc = proj.project(b, &CMatrix::zeros(n1, n2))?;
    let mut tc = T::zero();
    let mut xs: Vec<(CMatrix<T>, T)> = vec![(zc.clone(), tc); blocks];
    let mut us: Vec<(CMatrix<T>, T)> = vec![(CMatrix::zeros(n1, n2), T::zero()); blocks];
    let (mut r_norm, mut s_norm) = (T::zero(), T::zero());
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=cfg.max_iters {
        iterations = it;
        // objective and affine constraint
        {
            let (uz, ut) = &us[0];
            xs[0] = (proj.project(b, &(&zc - uz))?, tc - *ut - T::one() / rho);
        }
        for (i, &(kind, w)) in cones.iter().enumerate() {
            let (uz, ut) = &us[i + 1];
            xs[i + 1] = project_cone(kind, w, &(&zc - uz), tc - *ut);
        }
        let mut z_sum = CMatrix::zeros(n1, n2);
        let mut t_sum = T::zero();
        for ((xz, xt), (uz, ut)) in xs.iter().zip(&us) {
            z_sum += xz + uz;
            t_sum += *xt + *ut;
        }
        let z_new = z_sum.unscale(nb);
        let t_new = t_sum / nb;
        let mut r2 = T::zero();
        let mut u2 = T::zero();
        for ((xz, xt), (uz, ut)) in xs.iter().zip(us.iter_mut()) {
            let dz = xz - &z_new;
            let dt = *xt - t_new;
            r2 += sq(&dz) + dt * dt;
            *uz += dz;
            *ut += dt;
            u2 += sq(uz) + *ut * *ut;
        }
        let dz = &z_new - &zc;
        let dt = t_new - tc;
        s_norm = rho * nb.sqrt() * (sq(&dz) + dt * dt).sqrt();
        r_norm = r2.sqrt();
        zc = z_new;
        tc = t_new;
        let eps_p = lit::<T>(cfg.primal_tol) * (nb.sqrt() * (sq(&zc) + tc * tc).sqrt()).max(tiny);
        let eps_d = lit::<T>(cfg.dual_tol) * (rho * u2.sqrt()).max(tiny);
        if r_norm <= eps_p && s_norm <= eps_d {
            converged = true;
            break;
        }
    }
    let z = proj.project(b, &zc)?;
    Ok(BpResult {
        z,
        converged,
        iterations,
        primal_residual: crate::scalar::to_f64(r_norm),
        dual_residual: crate::scalar::to_f64(s_norm),
        ridge: proj.ridge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    fn real_matrix(rows: &[&[f64]]) -> CMatrix<f64> {
        CMatrix::from_fn(rows.len(), rows[0].len(), |i, j| cplx(rows[i][j], 0.0))
    }

    #[test]
    fn nuclear_prox_diagonal() {
        let z = real_matrix(&[&[3.0, 0.0], &[0.0, 1.0]]);
        let out = prox_nuclear(&z, 2.0).unwrap();
        assert!((out - real_matrix(&[&[1.0, 0.0], &[0.0, 0.0]])).norm() < 1e-12);
        assert!((prox_nuclear(&z, 0.0).unwrap() - &z).norm() < 1e-12);
        assert!(prox_nuclear(&z, -1.0).is_err());
    }

    #[test]
    fn row_prox_examples() {
        let z = real_matrix(&[&[3.0, 4.0], &[0.5, 0.5]]);
        let out = prox_row_l12(&z, 2.0).unwrap();
        assert!((out.row(0).norm() - 3.0).abs() < 1e-12);
        assert_eq!(out.row(1).norm(), 0.0);
        let col = prox_col_l12(&z, 1.0).unwrap();
        let via_adj = prox_row_l12(&z.adjoint(), 1.0).unwrap().adjoint();
        assert!((col - via_adj).norm() < 1e-14);
    }

    #[test]
    fn l1_threshold_values() {
        assert_eq!(l1_ball_threshold(&[1.0, 2.0], 5.0), 0.0);
        assert!((l1_ball_threshold::<f64>(&[3.0, 1.0], 2.0) - 1.0).abs() < 1e-15);
        // sum max(a - θ, 0) = r
        let a = [5.0f64, 3.0, 2.5, 0.1];
        let th = l1_ball_threshold(&a, 4.0);
        let s: f64 = a.iter().map(|x| (x - th).max(0.0)).sum();
        assert!((s - 4.0).abs() < 1e-12);
    }

    #[test]
    fn cone_projection_cases() {
        let z = real_matrix(&[&[3.0, 0.0], &[0.0, 4.0]]);
        // inside
        let (pz, pt) = project_cone(NormKind::RowL12, 1.0, &z, 10.0);
        assert_eq!((pz, pt), (z.clone(), 10.0));
        // polar
        let (pz, pt) = project_cone(NormKind::Nuclear, 1.0, &z, -5.0);
        assert_eq!(pz.norm(), 0.0);
        assert_eq!(pt, 0.0);
    }

    #[test]
    fn cone_projection_is_closest_point() {
        let z = real_matrix(&[&[1.0, -2.0, 0.5], &[0.3, 0.7, 2.0]]);
        for kind in [NormKind::Nuclear, NormKind::RowL12, NormKind::ColL12] {
            let (pz, pt) = project_cone(kind, 2.0, &z, 0.2);
            let norm = |m: &CMatrix<f64>| match kind {
                NormKind::Nuclear => nuclear_norm(m),
                NormKind::RowL12 => row_l12_norm(m),
                NormKind::ColL12 => col_l12_norm(m),
            };
            assert!(norm(&pz) <= 2.0 * pt + 1e-9);
            let d0 = ((&pz - &z).norm_squared() + (pt - 0.2).powi(2)).sqrt();
            // random feasible points are never closer
            for k in 0..50 {
                let s = 0.5 + 0.05 * k as f64;
                let cand = z.scale(s * 2.0 * pt.max(0.1) / norm(&z));
                let ct = norm(&cand) / 2.0;
                let d = ((&cand - &z).norm_squared() + (ct - 0.2).powi(2)).sqrt();
                assert!(d0 <= d + 1e-9, "{kind:?}");
            }
        }
    }
}
