//! Blind deconvolution round trip through the lifted operator.
//!
//! Two signals of length `n` are sparse in random Gaussian dictionaries,
//! `w = B h` and `x = C g`. Only `m` randomly chosen entries of their circular
//! convolution are observed. Each observation is bilinear in `(h, g)`, so
//! lifting turns the problem into recovering the sparse rank-one matrix
//! `h gᵀ`.

use serde::Serialize;
use spf_core::random::{complex_gaussian_vector, derive_seed, random_subset, rng_from_seed};
use spf_core::{
    init_thresholding, lift_bilinear, random_sparse_rank_one, raw_snr, spf_run, Bilinear, CMat,
    CVec, SpfConfig, C64, SNR_CAP_DB,
};

#[derive(Debug, Clone, Serialize)]
pub struct LiftReport {
    pub n: usize,
    pub s1: usize,
    pub s2: usize,
    pub m: usize,
    pub seed: u64,
    /// `‖A(h gᵀ) - f(h, g)‖ / ‖f(h, g)‖`.
    pub lifting_identity_error: f64,
    /// Same quantity against a direct circular convolution of `B h` and `C g`.
    pub convolution_error: f64,
    pub snr_db: f64,
    pub success: bool,
    pub outer_iterations: usize,
    pub stop_reason: String,
    pub support_recovered: bool,
}

fn circular_convolution(a: &CVec, b: &CVec) -> CVec {
    let n = a.len();
    CVec::from_fn(n, |l, _| (0..n).map(|j| a[j] * b[(l + n - j) % n]).sum())
}

/// Observation `ℓ` is `(B h ⊛ C g)[rows[ℓ]]`, so its coefficient on `h_j g_k`
/// is `(B e_j ⊛ C e_k)[rows[ℓ]]`.
pub fn subsampled_dictionary_convolution(
    b: &CMat,
    c: &CMat,
    rows: &[usize],
) -> spf_core::Result<Bilinear> {
    let n = b.nrows();
    Bilinear::from_fn(rows.len(), b.ncols(), c.ncols(), |l, j, k| {
        let t = rows[l];
        (0..n).map(|i| b[(i, j)] * c[((t + n - i) % n, k)]).sum()
    })
}

pub fn lift_demo(
    n: usize,
    s1: usize,
    s2: usize,
    m: usize,
    seed: u64,
) -> anyhow::Result<LiftReport> {
    anyhow::ensure!(n >= 2, "length must be at least 2");
    anyhow::ensure!((1..=n).contains(&m), "m must lie in 1..=n");
    let mut rng = rng_from_seed(derive_seed(seed, 1));
    let dict = |rng: &mut _| {
        let g: CVec = complex_gaussian_vector(rng, n * n, 1.0 / n as f64);
        CMat::from_column_slice(n, n, g.as_slice())
    };
    let b = dict(&mut rng);
    let c = dict(&mut rng);
    let mut rows = random_subset(&mut rng, n, m);
    rows.sort_unstable();
    let problem = subsampled_dictionary_convolution(&b, &c, &rows)?;
    let op = lift_bilinear(&problem)?;

    // The model's factors are h and conj(g): A(h conj(g)ᴴ) = f(h, g).
    let truth = random_sparse_rank_one::<f64>(n, n, s1, s2, derive_seed(seed, 2))?;
    let h = truth.u.clone();
    let g = truth.v.conjugate();
    let f = problem.evaluate(&h, &g)?;
    let lifted = op.apply(&truth.matrix())?;
    let lifting_identity_error = (&lifted - &f).norm() / f.norm();
    let conv = circular_convolution(&(&b * &h), &(&c * &g));
    let observed = CVec::from_iterator(m, rows.iter().map(|&t| conv[t]));
    let convolution_error = (&observed - &f).norm() / f.norm();

    let init = init_thresholding(&op, &lifted, s1, s2)?;
    let (snr_db, outer_iterations, stop_reason, support_recovered) =
        match spf_run(&op, &lifted, &SpfConfig::new(s1, s2), &init.v0) {
            Ok(out) => {
                let snr = raw_snr(&out.x_hat, &truth.matrix())?;
                let nz = |x: &CVec| {
                    (0..x.len())
                        .filter(|&i| x[i] != C64::new(0.0, 0.0))
                        .collect::<Vec<_>>()
                };
                let found =
                    nz(&out.factors.u) == nz(&truth.u) && nz(&out.factors.v) == nz(&truth.v);
                let reason = out.trace.stop_reason.map(|r| r.as_str()).unwrap_or("");
                (snr, out.trace.len(), reason.to_string(), found)
            }
            Err(spf_core::Error::DegenerateIterate { trace, .. }) => (
                f64::NEG_INFINITY,
                trace.len(),
                "degenerate_iterate".into(),
                false,
            ),
            Err(e) => return Err(e.into()),
        };
    Ok(LiftReport {
        n,
        s1,
        s2,
        m,
        seed,
        lifting_identity_error,
        convolution_error,
        snr_db: snr_db.min(SNR_CAP_DB),
        success: snr_db >= SNR_CAP_DB,
        outer_iterations,
        stop_reason,
        support_recovered,
    })
}
