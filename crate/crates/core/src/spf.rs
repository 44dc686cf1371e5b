//! Sparse power factorization and plain power factorization.
//!
//! Each outer iteration normalizes `v_{t-1}`, estimates `u_t` from
//! `b ≈ F(v_{t-1}) u` (HTP when `s1 < n1`, least squares otherwise),
//! normalizes `u_t`, then estimates `v_t` from `conj(b) ≈ G(u_t) v` in the
//! same way. The estimate is `X_t = u_t v_t^*` with `v_t` left unnormalized.

use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::htp::{
    htp, htp_iteration_budget, solve_least_squares, HtpConfig, StopRule, DEFAULT_BUDGET_DELTA,
};
use crate::linalg::{nnz, subspace_sin};
use crate::model::SparseRankOneModel;
use crate::operator::MeasurementOperator;
use crate::scalar::{all_finite, lit, to_f64, CMatrix, CVector, Real};

/// Inner HTP settings shared by both factor updates. The sparsity is taken
/// from `s1` / `s2`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerHtp {
    pub gamma: f64,
    /// Iteration cap; `None` uses `htp_iteration_budget(s, budget_delta)`.
    pub max_iters: Option<usize>,
    pub budget_delta: f64,
    pub stop: StopRule,
}

impl Default for InnerHtp {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            max_iters: None,
            budget_delta: DEFAULT_BUDGET_DELTA,
            stop: StopRule::SupportStable,
        }
    }
}

impl InnerHtp {
    fn config(&self, s: usize) -> Result<HtpConfig> {
        let max_iters = match self.max_iters {
            Some(k) => k,
            None => htp_iteration_budget(s, self.budget_delta)?,
        };
        Ok(HtpConfig {
            sparsity: s,
            gamma: self.gamma,
            max_iters,
            stop: self.stop,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SpfConfig<T: Real> {
    pub s1: usize,
    pub s2: usize,
    pub max_outer: usize,
    pub rel_change_tol: f64,
    pub htp: InnerHtp,
    /// Ground truth used only to trace the factor angles.
    pub oracle: Option<SparseRankOneModel<T>>,
    /// Keep `(u_t, v_t)` for every outer iteration.
    pub record_factors: bool,
}

impl<T: Real> SpfConfig<T> {
    pub fn new(s1: usize, s2: usize) -> Self {
        Self {
            s1,
            s2,
            max_outer: 50,
            rel_change_tol: 1e-8,
            htp: InnerHtp::default(),
            oracle: None,
            record_factors: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair<T: Real> {
    pub u: CVector<T>,
    pub v: CVector<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxOuter,
    RelativeChange,
    DegenerateIterate,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::MaxOuter => "max_outer",
            StopReason::RelativeChange => "relative_change",
            StopReason::DegenerateIterate => "degenerate_iterate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: usize,
    /// `‖b - A(u_t v_t^*)‖₂`.
    pub residual: f64,
    /// `‖b - A(u_t v_{t-1}^*)‖₂`, before the right-factor update.
    pub residual_before_v: f64,
    pub sin_theta: Option<f64>,
    pub sin_phi: Option<f64>,
    pub nnz_u: usize,
    pub nnz_v: usize,
    pub inner_iters_u: usize,
    pub inner_iters_v: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecoveryTrace {
    pub rows: Vec<TraceRow>,
    pub stop_reason: Option<StopReason>,
}

impl RecoveryTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// CSV with columns `t,residual,sin_theta,sin_phi,stop_reason`; the stop
    /// reason is filled on the last row only. Missing angles are empty fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,residual,sin_theta,sin_phi,stop_reason\n");
        let last = self.rows.len().saturating_sub(1);
        for (i, row) in self.rows.iter().enumerate() {
            let angle = |a: Option<f64>| a.map(|x| format!("{x:.16e}")).unwrap_or_default();
            let reason = if i == last {
                self.stop_reason.map(|r| r.as_str()).unwrap_or("")
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "{},{:.16e},{},{},{}",
                row.t,
                row.residual,
                angle(row.sin_theta),
                angle(row.sin_phi),
                reason
            );
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SpfOutput<T: Real> {
    pub x_hat: CMatrix<T>,
    pub factors: FactorPair<T>,
    pub trace: RecoveryTrace,
    /// Per-iteration factors when `record_factors` is set.
    pub history: Vec<FactorPair<T>>,
}

/// `‖u v^* - p q^*‖_F` from inner products only.
fn rank_one_distance<T: Real>(u: &CVector<T>, v: &CVector<T>, p: &CVector<T>, q: &CVector<T>) -> T {
    let a = u.norm_squared() * v.norm_squared();
    let b = p.norm_squared() * q.norm_squared();
    let cross = (p.dotc(u) * v.dotc(q)).re;
    (a + b - cross - cross).max(T::zero()).sqrt()
}

fn degenerate(t: usize, mut trace: RecoveryTrace) -> Error {
    trace.stop_reason = Some(StopReason::DegenerateIterate);
    Error::DegenerateIterate {
        iteration: t,
        trace: Box::new(trace),
    }
}

/// Runs sparse power factorization from the initial right factor `v0`.
pub fn spf_run<T: Real>(
    op: &MeasurementOperator<T>,
    b: &CVector<T>,
    cfg: &SpfConfig<T>,
    v0: &CVector<T>,
) -> Result<SpfOutput<T>> {
    let (m, n1, n2) = op.dims();
    if b.len() != m {
        return invalid(format!(
            "measurement length {} does not match m = {m}",
            b.len()
        ));
    }
    if v0.len() != n2 {
        return invalid(format!(
            "initial factor length {} does not match n2 = {n2}",
            v0.len()
        ));
    }
    if !all_finite(b.as_slice()) || !all_finite(v0.as_slice()) {
        return invalid("measurements and initial factor must be finite");
    }
    if cfg.s1 == 0 || cfg.s1 > n1 || cfg.s2 == 0 || cfg.s2 > n2 {
        return invalid(format!(
            "sparsities must satisfy 1 <= s1 <= {n1}, 1 <= s2 <= {n2}; got ({}, {})",
            cfg.s1, cfg.s2
        ));
    }
    if cfg.max_outer == 0 {
        return invalid("max_outer must be at least 1");
    }
    if let Some(o) = &cfg.oracle {
        if o.n1() != n1 || o.n2() != n2 {
            return invalid("oracle model dimensions do not match the operator");
        }
    }
    if v0.norm() == T::zero() {
        return invalid("initial factor must be nonzero");
    }
    let htp_u = (cfg.s1 < n1).then(|| cfg.htp.config(cfg.s1)).transpose()?;
    let htp_v = (cfg.s2 < n2).then(|| cfg.htp.config(cfg.s2)).transpose()?;
    let b_conj = b.conjugate();
    let tiny = lit::<T>(1e-300);
    let tol = lit::<T>(cfg.rel_change_tol);

    let mut trace = RecoveryTrace::default();
    let mut history = Vec::new();
    let mut v = v0.clone();
    let mut prev: Option<(CVector<T>, CVector<T>)> = None;
    let mut u = CVector::zeros(n1);

    for t in 1..=cfg.max_outer {
        let nv = v.norm();
        if !(nv > T::zero()) {
            return Err(degenerate(t, trace));
        }
        v.unscale_mut(nv);

        let f = op.build_f(&v)?;
        let (u_new, iters_u) = match &htp_u {
            Some(c) => {
                let r = htp(&f, b, c)?;
                (r.x_hat, r.iterations)
            }
            None => (solve_least_squares(&f, b).0, 1),
        };
        let nu = u_new.norm();
        if !(nu > T::zero()) || !nu.is_finite() {
            return Err(degenerate(t, trace));
        }
        u = u_new.unscale(nu);
        let residual_before_v = (b - &f * &u).norm();

        let g = op.build_g(&u)?;
        let (v_new, iters_v) = match &htp_v {
            Some(c) => {
                let r = htp(&g, &b_conj, c)?;
                (r.x_hat, r.iterations)
            }
            None => (solve_least_squares(&g, &b_conj).0, 1),
        };
        v = v_new;
        // A(u v^*) = conj(G(u) v)
        let residual = (&b_conj - &g * &v).norm();

        let (sin_theta, sin_phi) = match &cfg.oracle {
            Some(o) => (
                subspace_sin(&u, &o.u).ok().map(to_f64),
                subspace_sin(&v, &o.v).ok().map(to_f64),
            ),
            None => (None, None),
        };
        trace.rows.push(TraceRow {
            t,
            residual: to_f64(residual),
            residual_before_v: to_f64(residual_before_v),
            sin_theta,
            sin_phi,
            nnz_u: nnz(&u),
            nnz_v: nnz(&v),
            inner_iters_u: iters_u,
            inner_iters_v: iters_v,
        });
        if cfg.record_factors {
            history.push(FactorPair {
                u: u.clone(),
                v: v.clone(),
            });
        }

        if let Some((pu, pv)) = &prev {
            let change = rank_one_distance(&u, &v, pu, pv);
            let scale = (u.norm() * v.norm()).max(tiny);
            if change / scale < tol {
                trace.stop_reason = Some(StopReason::RelativeChange);
                break;
            }
        }
        prev = Some((u.clone(), v.clone()));
    }
    if trace.stop_reason.is_none() {
        trace.stop_reason = Some(StopReason::MaxOuter);
    }
    let x_hat = &u * v.adjoint();
    Ok(SpfOutput {
        x_hat,
        factors: FactorPair { u, v },
        trace,
        history,
    })
}

/// Power factorization: both factor updates are plain least squares.
pub fn pf_run<T: Real>(
    op: &MeasurementOperator<T>,
    b: &CVector<T>,
    cfg: &SpfConfig<T>,
    v0: &CVector<T>,
) -> Result<SpfOutput<T>> {
    let mut cfg = cfg.clone();
    cfg.s1 = op.n1();
    cfg.s2 = op.n2();
    spf_run(op, b, &cfg, v0)
}

/// Capped reconstruction SNR in dB: `min{50, 20 log10(‖X‖_F / ‖X̂ - X‖_F)}`.
pub fn reconstruction_snr<T: Real>(x_hat: &CMatrix<T>, x: &CMatrix<T>) -> Result<f64> {
    Ok(raw_snr(x_hat, x)?.min(SNR_CAP_DB))
}

pub const SNR_CAP_DB: f64 = 50.0;
pub const AMPLIFICATION_CAP: f64 = 3.0;

/// Uncapped SNR in dB (`+∞` for an exact reconstruction).
pub fn raw_snr<T: Real>(x_hat: &CMatrix<T>, x: &CMatrix<T>) -> Result<f64> {
    if x_hat.shape() != x.shape() {
        return invalid("reconstruction shape mismatch");
    }
    let nx = to_f64(x.norm());
    if nx == 0.0 {
        return invalid("reference matrix must be nonzero");
    }
    let err = to_f64((x_hat - x).norm());
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (nx / err).log10())
}

/// Capped noise amplification `min{3, log10(‖X̂ - X‖_F / (ν ‖X‖_F))}`.
pub fn noise_amplification<T: Real>(x_hat: &CMatrix<T>, x: &CMatrix<T>, nu: f64) -> Result<f64> {
    if !(nu > 0.0) || !nu.is_finite() {
        return invalid("noise level must be positive");
    }
    if x_hat.shape() != x.shape() {
        return invalid("reconstruction shape mismatch");
    }
    let nx = to_f64(x.norm());
    if nx == 0.0 {
        return invalid("reference matrix must be nonzero");
    }
    let err = to_f64((x_hat - x).norm());
    Ok((err / (nu * nx)).log10().min(AMPLIFICATION_CAP))
}
