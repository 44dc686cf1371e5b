//! Closed-form constants and bounds from the recovery analysis, plus an
//! empirical estimate of the rank-r, doubly sparse restricted isometry
//! constant. All logarithms are natural.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::operator::MeasurementOperator;
use crate::random::{complex_gaussian, derive_seed, random_subset, rng_from_seed};
use crate::scalar::{to_f64, CMatrix, CVector, Real};

/// HTP contraction constants at RIP constant `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstants {
    pub delta: f64,
    pub rho: f64,
    pub tau: f64,
    pub rho_prime: f64,
    pub tau_prime: f64,
    /// Error amplification `C_δ^HTP = 1.01 τ / (1 - ρ)`.
    pub c_htp: f64,
    /// Burn-in iterations `L_δ`.
    pub l: u64,
    /// Per-unit-sparsity iterations `K_δ`.
    pub k: f64,
}

/// Largest admissible RIP constant (`ρ < 1` iff `δ < 1/√3`).
pub fn max_delta() -> f64 {
    1.0 / 3f64.sqrt()
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < max_delta()) {
        return invalid(format!("RIP constant {delta} outside (0, 1/sqrt(3))"));
    }
    Ok(())
}

/// `C_δ^HTP` alone; also defined at `δ = 0`.
pub fn c_htp(delta: f64) -> f64 {
    let rho = (2.0 * delta * delta / (1.0 - delta * delta)).sqrt();
    let tau = (2.0 / (1.0 - delta * delta)).sqrt() + 1.0 / (1.0 - delta);
    1.01 * tau / (1.0 - rho)
}

pub fn htp_constants(delta: f64) -> Result<TheoryConstants> {
    check_delta(delta)?;
    let d2 = delta * delta;
    let rho = (2.0 * d2 / (1.0 - d2)).sqrt();
    let tau = (2.0 / (1.0 - d2)).sqrt() + 1.0 / (1.0 - delta);
    let rho_prime = 1.0 / (1.0 - d2).sqrt();
    let tau_prime = 1.0 / (1.0 - delta);
    let l = ((100.0 * (2.0 * rho_prime - rho)).ln() / (1.0 / rho).ln()).ceil();
    let k = (1.0 + 2.0 * (rho_prime + (tau_prime / tau) * (1.0 - rho) / 2.0)).ln()
        / (2.0 / (1.0 + rho)).ln();
    Ok(TheoryConstants {
        delta,
        rho,
        tau,
        rho_prime,
        tau_prime,
        c_htp: 1.01 * tau / (1.0 - rho),
        l: l.max(0.0) as u64,
        k,
    })
}

/// Fixed points of the angle map `f(ω) = asin(C_δ^HTP [δ tan ω + (1+δ) ν sec ω])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaBounds {
    pub omega_inf: f64,
    pub omega_sup: f64,
    /// `{ω ∈ [0, π/2) : ω ≥ f(ω)}` is non-empty.
    pub feasible: bool,
}

impl OmegaBounds {
    pub fn sin_inf(&self) -> f64 {
        self.omega_inf.sin()
    }

    pub fn sin_sup(&self) -> f64 {
        self.omega_sup.sin()
    }
}

/// The angle map; arguments of `asin` above one saturate at `π/2`.
pub fn angle_map(delta: f64, nu: f64, omega: f64) -> f64 {
    let arg = c_htp(delta) * (delta * omega.tan() + (1.0 + delta) * nu / omega.cos());
    arg.clamp(0.0, 1.0).asin()
}

const OMEGA_SAMPLES: usize = 10_000;
const BISECTION_TOL: f64 = 1e-12;

/// Locates `ω_inf` and `ω_sup` by scanning `g(ω) = ω - f(ω)` on a uniform
/// grid of `[0, π/2)` for sign changes and bisecting each bracket.
pub fn omega_bounds(delta: f64, nu: f64) -> Result<OmegaBounds> {
    check_delta(delta)?;
    if !(nu >= 0.0) || !nu.is_finite() {
        return invalid("noise level must be non-negative");
    }
    let g = |w: f64| w - angle_map(delta, nu, w);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let step = half_pi / OMEGA_SAMPLES as f64;
    let grid: Vec<f64> = (0..OMEGA_SAMPLES).map(|i| i as f64 * step).collect();
    let inside: Vec<bool> = grid.iter().map(|&w| g(w) >= 0.0).collect();

    let Some(first) = inside.iter().position(|&b| b) else {
        return Ok(OmegaBounds {
            omega_inf: f64::NAN,
            omega_sup: f64::NAN,
            feasible: false,
        });
    };
    let last = inside.iter().rposition(|&b| b).unwrap();

    let omega_inf = if first == 0 {
        0.0
    } else {
        // g < 0 at grid[first-1], g ≥ 0 at grid[first]
        bisect(&g, grid[first - 1], grid[first])
    };
    let omega_sup = if last + 1 < OMEGA_SAMPLES {
        // g ≥ 0 at grid[last], g < 0 at grid[last+1]
        bisect(&g, grid[last + 1], grid[last])
    } else {
        grid[last]
    };
    Ok(OmegaBounds {
        omega_inf,
        omega_sup,
        feasible: true,
    })
}

/// Bisection for a root of `g` with `g(neg) < 0 ≤ g(pos)`.
fn bisect(g: &impl Fn(f64) -> f64, mut neg: f64, mut pos: f64) -> f64 {
    while (pos - neg).abs() > BISECTION_TOL {
        let mid = 0.5 * (neg + pos);
        if g(mid) >= 0.0 {
            pos = mid;
        } else {
            neg = mid;
        }
    }
    pos
}

/// Noise amplification constant `C` with `sin ω_inf ≤ C ν` for all `δ ≤ δ₀`,
/// `ν ≤ ν₀`:
///
/// ```text
/// C = C₁ (1 + δ₀) / (cos ω̃ - C₁ δ₀),   C₁ = C_{δ₀}^HTP,  ω̃ = ω_inf(δ₀, ν₀)
/// ```
pub fn noise_amp_constant(delta0: f64, nu0: f64) -> Result<f64> {
    let bounds = omega_bounds(delta0, nu0)?;
    if !bounds.feasible {
        return invalid(format!(
            "no stable angle region at delta = {delta0}, nu = {nu0}"
        ));
    }
    let c1 = c_htp(delta0);
    let denom = bounds.omega_inf.cos() - c1 * delta0;
    if !(denom > 0.0) {
        return invalid(format!(
            "noise amplification unbounded at delta = {delta0}, nu = {nu0}"
        ));
    }
    Ok(c1 * (1.0 + delta0) / denom)
}

/// Converts an angle bound into a relative Frobenius error bound.
pub fn frobenius_factor(delta: f64) -> f64 {
    ((1.0 + delta) / (1.0 - delta)).sqrt()
}

/// Relative Frobenius error constant: `frobenius_factor(δ₀) · noise_amp_constant(δ₀, ν₀)`.
pub fn frobenius_noise_constant(delta0: f64, nu0: f64) -> Result<f64> {
    Ok(frobenius_factor(delta0) * noise_amp_constant(delta0, nu0)?)
}

/// Information-theoretic lower bound on the number of measurements for
/// mean-square error `D ∈ (0, 1/12)` at noise variance `sigma2`:
/// `((s1 + s2 - 2) ln(1/(12 D)) - 7) / ln(1 + 1/σ²)`.
pub fn measurement_lower_bound(s1: usize, s2: usize, d: f64, sigma2: f64) -> Result<f64> {
    if !(d > 0.0 && d < 1.0 / 12.0) {
        return invalid(format!("distortion {d} outside (0, 1/12)"));
    }
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return invalid("noise variance must be positive");
    }
    let dof = (s1 + s2) as f64 - 2.0;
    Ok((dof * (1.0 / (12.0 * d)).ln() - 7.0) / (1.0 + 1.0 / sigma2).ln())
}

/// Degrees-of-freedom limit for stable recovery, `s1 + s2 - 2`.
pub fn dof_bound(s1: usize, s2: usize) -> i64 {
    s1 as i64 + s2 as i64 - 2
}

/// Rate-distortion lower bound for a uniform one-dimensional subspace of
/// `C^n`: `(n - 1) log⁺(1/(6D)) - 3.5`.
pub fn rate_distortion_lower(n: usize, d: f64) -> Result<f64> {
    if n < 2 {
        return invalid("dimension must be at least 2");
    }
    if !(d > 0.0 && d < 2.0) {
        return invalid(format!("distortion {d} outside (0, 2)"));
    }
    Ok((n - 1) as f64 * (1.0 / (6.0 * d)).ln().max(0.0) - 3.5)
}

/// Sufficient Gaussian sample size `c1 r (s1 + s2) ln(max(n1/s1, n2/s2))` for
/// the rank-r doubly sparse RIP. `c1` is a universal constant the user must
/// supply.
pub fn rip_sample_size(
    c1: f64,
    r: usize,
    s1: usize,
    s2: usize,
    n1: usize,
    n2: usize,
) -> Result<f64> {
    if s1 == 0 || s2 == 0 || s1 > n1 || s2 > n2 || r == 0 {
        return invalid("sparsities must satisfy 1 <= s <= n and rank >= 1");
    }
    let ratio = (n1 as f64 / s1 as f64).max(n2 as f64 / s2 as f64);
    Ok(c1 * r as f64 * (s1 + s2) as f64 * ratio.ln())
}

/// Lower estimate of the rank-`r`, doubly `(s1, s2)`-sparse isometry
/// constant: the running maximum of `|‖A(Z)‖² - 1|` over random unit-norm
/// test matrices. Sample `i` is drawn from the stream `derive_seed(seed, i)`.
pub fn empirical_rip<T: Real>(
    op: &MeasurementOperator<T>,
    r: usize,
    s1: usize,
    s2: usize,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    let (_, n1, n2) = op.dims();
    if !(1..=2).contains(&r) {
        return invalid("rank must be 1 or 2");
    }
    if n_samples == 0 {
        return invalid("need at least one sample");
    }
    if s1 == 0 || s2 == 0 || s1 > n1 || s2 > n2 {
        return invalid("sparsities must satisfy 1 <= s <= n");
    }
    let deviations: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(derive_seed(seed, i as u64));
            let rows = random_subset(&mut rng, n1, s1);
            let cols = random_subset(&mut rng, n2, s2);
            let mut z = CMatrix::<T>::zeros(n1, n2);
            for _ in 0..r {
                let a = CVector::<T>::from_fn(s1, |_, _| complex_gaussian(&mut rng, 1.0));
                let b = CVector::<T>::from_fn(s2, |_, _| complex_gaussian(&mut rng, 1.0));
                for (ai, &ri) in a.iter().zip(&rows) {
                    for (bk, &ck) in b.iter().zip(&cols) {
                        z[(ri, ck)] += *ai * bk.conj();
                    }
                }
            }
            let nz = z.norm();
            let z = z.unscale(nz);
            let energy = op
                .apply(&z)
                .map(|y| to_f64(y.norm_squared()))
                .unwrap_or(f64::NAN);
            (energy - 1.0).abs()
        })
        .collect();
    Ok(deviations.into_iter().fold(0.0, f64::max))
}
