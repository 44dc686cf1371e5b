//! Monte-Carlo trials, phase-transition grids and noise sweeps.
//!
//! Seeds are derived as master → cell → trial → stream, with the cell label
//! hashed from its coordinates, so any sub-grid reproduces the same trials.
//! Trials run in parallel and results are collected in grid order.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use spf_core::baselines::{bp_solve_with, AffineProjector, BpVariant, BpWeights};
use spf_core::init::{init_optimal, init_pf_proxy, init_rowsparse, init_thresholding, RowNorm};
use spf_core::random::{complex_gaussian_vector, derive_seed, derive_seed_path, rng_from_seed};
use spf_core::spf::{noise_amplification, raw_snr, spf_run, SpfConfig, SNR_CAP_DB};
use spf_core::{
    gaussian_operator, random_sparse_rank_one, CMat, CVec, Error, GaussianSpec, Model, Operator,
};

use crate::json::format_f64;
use crate::spec::{Algorithm, Cell, ExperimentSpec, InitChoice, NoiseSweepSpec, SolverSettings};

pub const STREAM_OPERATOR: u64 = 1;
pub const STREAM_SIGNAL: u64 = 2;
pub const STREAM_NOISE: u64 = 3;
pub const STREAM_RETRY: u64 = 4;

const NOISE_SWEEP_TAG: u64 = 3;

/// Outcome of one recovery attempt.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub cell: Option<Cell>,
    pub trial: usize,
    /// Capped at 50 dB.
    pub snr_db: f64,
    /// Uncapped; `+∞` for an exact reconstruction.
    pub raw_snr_db: f64,
    pub success: bool,
    /// `None` for noiseless trials.
    pub amplification: Option<f64>,
    pub outer_iterations: usize,
    pub stop_reason: String,
    /// `‖b - A(X̂)‖ / ‖b‖`.
    pub relative_residual: f64,
    pub retried: bool,
    /// Excluded from every CSV so outputs stay reproducible.
    #[serde(skip)]
    pub wall_time_s: f64,
}

/// Noisy measurements `A(X) + z` with `‖z‖ = ν ‖A(X)‖` exactly.
pub fn measure(op: &Operator, x: &CMat, nu: f64, seed: u64) -> spf_core::Result<CVec> {
    let clean = op.apply(x)?;
    if nu == 0.0 {
        return Ok(clean);
    }
    let mut rng = rng_from_seed(seed);
    let z: CVec = complex_gaussian_vector(&mut rng, clean.len(), 1.0);
    let scale = nu * clean.norm() / z.norm();
    Ok(clean + z.scale(scale))
}

fn initial_factor(
    op: &Operator,
    b: &CVec,
    model: &Model,
    init: InitChoice,
    s1: usize,
    s2: usize,
    budget: u128,
) -> spf_core::Result<CVec> {
    let v0 = match init {
        InitChoice::Optimal => init_optimal(op, b, s1, s2, budget)?.v0,
        InitChoice::Thresholding => init_thresholding(op, b, s1, s2)?.v0,
        InitChoice::RowSparseFrobenius => init_rowsparse(op, b, s1, RowNorm::Frobenius, budget)?.v0,
        InitChoice::RowSparseSpectral => init_rowsparse(op, b, s1, RowNorm::Spectral, budget)?.v0,
        InitChoice::Proxy => init_pf_proxy(op, b)?.v0,
        InitChoice::Oracle => model.v.clone(),
    };
    Ok(v0)
}

fn perturb(v0: &CVec, seed: u64) -> CVec {
    let mut rng = rng_from_seed(seed);
    let g: CVec = complex_gaussian_vector(&mut rng, v0.len(), 1.0);
    v0 + g.scale(1e-3 * v0.norm() / g.norm())
}

struct Estimate {
    x_hat: CMat,
    iterations: usize,
    stop_reason: String,
    retried: bool,
}

fn failed(reason: &str, n1: usize, n2: usize, retried: bool) -> Estimate {
    Estimate {
        x_hat: CMat::zeros(n1, n2),
        iterations: 0,
        stop_reason: reason.to_string(),
        retried,
    }
}

fn run_factorization(
    op: &Operator,
    b: &CVec,
    model: &Model,
    algorithm: Algorithm,
    init: InitChoice,
    seed: u64,
    settings: &SolverSettings,
) -> spf_core::Result<Estimate> {
    let (_, n1, n2) = op.dims();
    let (s1, s2) = match algorithm {
        Algorithm::Pf => (n1, n2),
        _ => (model.s1, model.s2),
    };
    let v0 = match initial_factor(
        op,
        b,
        model,
        init,
        s1,
        s2,
        settings.combinatorial_budget as u128,
    ) {
        Ok(v) => v,
        Err(Error::DegenerateInput(_)) => return Ok(failed("degenerate_input", n1, n2, false)),
        Err(e) => return Err(e),
    };
    let mut cfg = SpfConfig::new(s1, s2);
    cfg.max_outer = settings.max_outer;
    cfg.rel_change_tol = settings.rel_change_tol;
    let first = spf_run(op, b, &cfg, &v0);
    let (out, retried) = match first {
        Ok(out) => (out, false),
        Err(Error::DegenerateIterate { .. }) => {
            match spf_run(op, b, &cfg, &perturb(&v0, derive_seed(seed, STREAM_RETRY))) {
                Ok(out) => (out, true),
                Err(Error::DegenerateIterate { .. }) => {
                    return Ok(failed("degenerate_iterate", n1, n2, true))
                }
                Err(e) => return Err(e),
            }
        }
        Err(e) => return Err(e),
    };
    Ok(Estimate {
        x_hat: out.x_hat,
        iterations: out.trace.len(),
        stop_reason: out
            .trace
            .stop_reason
            .map(|r| r.as_str())
            .unwrap_or("")
            .to_string(),
        retried,
    })
}

fn run_basis_pursuit(
    op: &Operator,
    b: &CVec,
    model: &Model,
    variant: BpVariant,
    settings: &SolverSettings,
) -> spf_core::Result<Estimate> {
    let proj = AffineProjector::new(op)?;
    let weights = BpWeights::from_signal(&model.matrix());
    let out = bp_solve_with(&proj, b, &weights, variant, &settings.admm())?;
    Ok(Estimate {
        x_hat: out.z,
        iterations: out.iterations,
        stop_reason: if out.converged {
            "converged"
        } else {
            "max_iters"
        }
        .to_string(),
        retried: false,
    })
}

/// Runs one trial: measures `model` through `op` with noise level `nu` (noise
/// drawn from `seed`'s noise stream), estimates with `algorithm` and scores the
/// result. A success means raw SNR ≥ `threshold_db`.
#[allow(clippy::too_many_arguments)]
pub fn run_trial(
    op: &Operator,
    model: &Model,
    nu: f64,
    algorithm: Algorithm,
    init: InitChoice,
    seed: u64,
    threshold_db: f64,
    settings: &SolverSettings,
) -> spf_core::Result<TrialResult> {
    let start = Instant::now();
    let x = model.matrix();
    let b = measure(op, &x, nu, derive_seed(seed, STREAM_NOISE))?;
    let est = match algorithm {
        Algorithm::Spf | Algorithm::Pf => {
            run_factorization(op, &b, model, algorithm, init, seed, settings)?
        }
        Algorithm::BpLr => run_basis_pursuit(op, &b, model, BpVariant::LR, settings)?,
        Algorithm::BpRs => run_basis_pursuit(op, &b, model, BpVariant::RS, settings)?,
        Algorithm::BpRslr => run_basis_pursuit(op, &b, model, BpVariant::RSLR, settings)?,
        Algorithm::BpDs => run_basis_pursuit(op, &b, model, BpVariant::DS, settings)?,
        Algorithm::BpDslr => run_basis_pursuit(op, &b, model, BpVariant::DSLR, settings)?,
    };
    let raw = raw_snr(&est.x_hat, &x)?;
    let amplification = if nu > 0.0 {
        Some(noise_amplification(&est.x_hat, &x, nu)?)
    } else {
        None
    };
    let residual = (&b - op.apply(&est.x_hat)?).norm() / b.norm();
    Ok(TrialResult {
        cell: None,
        trial: 0,
        snr_db: raw.min(SNR_CAP_DB),
        raw_snr_db: raw,
        success: raw >= threshold_db,
        amplification,
        outer_iterations: est.iterations,
        stop_reason: est.stop_reason,
        relative_residual: residual,
        retried: est.retried,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Draws the operator and signal for trial `trial` of a cell and runs it.
#[allow(clippy::too_many_arguments)]
pub fn run_cell_trial(
    cell_seed: u64,
    trial: usize,
    m: usize,
    dims: (usize, usize, usize, usize),
    nu: f64,
    algorithm: Algorithm,
    init: InitChoice,
    threshold_db: f64,
    settings: &SolverSettings,
) -> spf_core::Result<TrialResult> {
    let (n1, n2, s1, s2) = dims;
    let seed = derive_seed(cell_seed, trial as u64);
    let model = random_sparse_rank_one(n1, n2, s1, s2, derive_seed(seed, STREAM_SIGNAL))?;
    let op = gaussian_operator(&GaussianSpec::new(
        m,
        n1,
        n2,
        derive_seed(seed, STREAM_OPERATOR),
    ))?;
    let mut r = run_trial(
        &op,
        &model,
        nu,
        algorithm,
        init,
        seed,
        threshold_db,
        settings,
    )?;
    r.trial = trial;
    Ok(r)
}

/// Per-cell aggregate of a phase-transition grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub cell: Cell,
    pub trials: usize,
    pub successes: usize,
}

impl CellSummary {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone)]
pub struct PhaseTransition {
    pub cells: Vec<CellSummary>,
    pub trials: Vec<TrialResult>,
}

impl PhaseTransition {
    pub fn cell(&self, axis1: usize, axis2: usize, m: usize) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.cell.axis1 == axis1 && c.cell.axis2 == axis2 && c.cell.m == m)
    }

    /// CSV with columns `axis1,axis2,m,trials,successes,rate`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["axis1", "axis2", "m", "trials", "successes", "rate"])
            .expect("in-memory write");
        for c in &self.cells {
            w.write_record([
                c.cell.axis1.to_string(),
                c.cell.axis2.to_string(),
                c.cell.m.to_string(),
                c.trials.to_string(),
                c.successes.to_string(),
                format_f64(c.rate()),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
    }
}

/// Seed of one grid cell.
pub fn cell_seed(spec: &ExperimentSpec, cell: &Cell) -> u64 {
    derive_seed_path(spec.master_seed, &spec.grid.seed_labels(cell))
}

/// Success rate of every cell of `spec`.
pub fn phase_transition(spec: &ExperimentSpec) -> anyhow::Result<PhaseTransition> {
    spec.validate()?;
    let cells = spec.grid.cells();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..spec.trials).map(move |t| (c, t)))
        .collect();
    let results: Vec<TrialResult> = jobs
        .par_iter()
        .map(|&(ci, t)| {
            let cell = &cells[ci];
            let mut r = run_cell_trial(
                cell_seed(spec, cell),
                t,
                cell.m,
                (cell.n1, cell.n2, cell.s1, cell.s2),
                spec.nu,
                spec.algorithm,
                spec.init,
                spec.threshold_db,
                &spec.solver,
            )?;
            r.cell = Some(*cell);
            Ok(r)
        })
        .collect::<spf_core::Result<_>>()?;
    let summaries = cells
        .iter()
        .enumerate()
        .map(|(ci, cell)| CellSummary {
            cell: *cell,
            trials: spec.trials,
            successes: results[ci * spec.trials..(ci + 1) * spec.trials]
                .iter()
                .filter(|r| r.success)
                .count(),
        })
        .collect();
    Ok(PhaseTransition {
        cells: summaries,
        trials: results,
    })
}

/// Median of the finite-or-infinite values (NaN entries are ignored); the
/// mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        let (a, b) = (v[n / 2 - 1], v[n / 2]);
        if a == b {
            a
        } else {
            0.5 * (a + b)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseCell {
    pub nu: f64,
    pub m_ratio: f64,
    pub m: usize,
    pub median_snr_db: f64,
    /// NaN when `nu = 0`.
    pub median_amp: f64,
}

#[derive(Debug, Clone)]
pub struct NoiseSweep {
    pub cells: Vec<NoiseCell>,
    pub trials: Vec<TrialResult>,
}

impl NoiseSweep {
    /// CSV with columns `nu,m_ratio,median_snr_db,median_amp`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["nu", "m_ratio", "median_snr_db", "median_amp"])
            .expect("in-memory write");
        for c in &self.cells {
            w.write_record([
                format_f64(c.nu),
                format_f64(c.m_ratio),
                format_f64(c.median_snr_db),
                format_f64(c.median_amp),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
    }
}

/// Median SNR and amplification over a `(ν, m_ratio)` grid. Cells are ordered
/// with `m_ratio` outermost.
pub fn noise_sweep(spec: &NoiseSweepSpec) -> anyhow::Result<NoiseSweep> {
    spec.validate()?;
    let s2 = spec.s2();
    let mut grid = Vec::new();
    for &ratio in &spec.m_ratio {
        for &nu in &spec.nu {
            grid.push((nu, ratio));
        }
    }
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|c| (0..spec.trials).map(move |t| (c, t)))
        .collect();
    let results: Vec<TrialResult> = jobs
        .par_iter()
        .map(|&(ci, t)| {
            let (nu, ratio) = grid[ci];
            let m = spec.m_for(ratio);
            let seed = derive_seed_path(
                spec.master_seed,
                &[
                    NOISE_SWEEP_TAG,
                    spec.n1 as u64,
                    spec.n2 as u64,
                    spec.s1 as u64,
                    s2 as u64,
                    nu.to_bits(),
                    m as u64,
                ],
            );
            run_cell_trial(
                seed,
                t,
                m,
                (spec.n1, spec.n2, spec.s1, s2),
                nu,
                spec.algorithm,
                spec.init,
                SNR_CAP_DB,
                &spec.solver,
            )
        })
        .collect::<spf_core::Result<_>>()?;
    let cells = grid
        .iter()
        .enumerate()
        .map(|(ci, &(nu, ratio))| {
            let rows = &results[ci * spec.trials..(ci + 1) * spec.trials];
            let snr: Vec<f64> = rows.iter().map(|r| r.snr_db).collect();
            let amp: Vec<f64> = rows
                .iter()
                .map(|r| r.amplification.unwrap_or(f64::NAN))
                .collect();
            NoiseCell {
                nu,
                m_ratio: ratio,
                m: spec.m_for(ratio),
                median_snr_db: median(&snr),
                median_amp: median(&amp),
            }
        })
        .collect();
    Ok(NoiseSweep {
        cells,
        trials: results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_values() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(
            median(&[f64::NEG_INFINITY, f64::NEG_INFINITY]),
            f64::NEG_INFINITY
        );
        assert!(median(&[f64::NAN]).is_nan());
    }

    #[test]
    fn noise_has_exact_level() {
        let model = random_sparse_rank_one::<f64>(8, 4, 2, 4, 1).unwrap();
        let op = gaussian_operator(&GaussianSpec::new(30, 8, 4, 2)).unwrap();
        let x = model.matrix();
        let clean = op.apply(&x).unwrap();
        let b = measure(&op, &x, 0.3, 5).unwrap();
        assert!(((&b - &clean).norm() / clean.norm() - 0.3).abs() < 1e-12);
        assert_eq!(measure(&op, &x, 0.0, 5).unwrap(), clean);
    }
}
