//! Recovery of simultaneously sparse, rank-one complex matrices
//! `X = λ u v^*` from linear measurements `b = A(X) + z`.
//!
//! The crate provides measurement operators (Gaussian ensembles and lifted
//! bilinear forms), hard thresholding pursuit, sparse power factorization
//! with its initializations, convex basis-pursuit baselines and a calculator
//! for the associated theoretical constants.
//!
//! Numerical code is generic over the real scalar type; the aliases below fix
//! it to `f64`.
//!
//! ```
//! use spf_core::{gaussian_operator, random_sparse_rank_one, init_thresholding, spf_run,
//!                reconstruction_snr, GaussianSpec, Operator, SpfConfig};
//!
//! let truth = random_sparse_rank_one::<f64>(32, 4, 3, 4, 7).unwrap();
//! let op: Operator = gaussian_operator(&GaussianSpec::new(48, 32, 4, 11)).unwrap();
//! let b = op.apply(&truth.matrix()).unwrap();
//! let init = init_thresholding(&op, &b, 3, 4).unwrap();
//! let out = spf_run(&op, &b, &SpfConfig::new(3, 4), &init.v0).unwrap();
//! assert!(reconstruction_snr(&out.x_hat, &truth.matrix()).unwrap() >= 50.0);
//! ```

// `!(x > 0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod htp;
pub mod init;
pub mod linalg;
pub mod model;
pub mod operator;
pub mod random;
pub mod scalar;
pub mod spf;
pub mod theory;

pub use baselines::{
    bp_solve, bp_solve_with, col_l12_norm, nuclear_norm, project_affine, prox_col_l12,
    prox_nuclear, prox_row_l12, row_l12_norm, AdmmConfig, AffineProjector, BpProblem, BpResult,
    BpVariant, BpWeights,
};
pub use error::{Error, Result};
pub use htp::{
    htp, htp_iteration_budget, least_squares, restricted_least_squares, HtpConfig, HtpResult,
    StopRule,
};
pub use init::{
    binomial, init_optimal, init_pf_proxy, init_rowsparse, init_thresholding,
    optimal_candidate_count, project_sparse_rows, proxy_matrix, InitMethod, InitResult, RowNorm,
    DEFAULT_COMBINATORIAL_BUDGET,
};
pub use linalg::{
    hard_threshold, leading_pair, mat_inner, nnz, outer, project_cols, project_rows,
    project_vector, sparse_norm, spectral_norm, subspace_sin, threshold_support, IndexSet,
    LeadingPair,
};
pub use model::{random_sparse_rank_one, SparseRankOneModel};
pub use operator::{
    gaussian_operator, lift_bilinear, make_convolution_lifting, BilinearProblem, GaussianSpec,
    MeasurementOperator,
};
pub use scalar::{CMatrix, CVector, Real};
pub use spf::{
    noise_amplification, pf_run, raw_snr, reconstruction_snr, spf_run, FactorPair, InnerHtp,
    RecoveryTrace, SpfConfig, SpfOutput, StopReason, TraceRow, AMPLIFICATION_CAP, SNR_CAP_DB,
};
pub use theory::{htp_constants, omega_bounds, OmegaBounds, TheoryConstants};

/// Complex scalar.
pub type C64 = num_complex::Complex<f64>;
pub type CVec = CVector<f64>;
pub type CMat = CMatrix<f64>;
pub type Operator = MeasurementOperator<f64>;
pub type Bilinear = BilinearProblem<f64>;
pub type Model = SparseRankOneModel<f64>;
pub type Config = SpfConfig<f64>;
pub type Output = SpfOutput<f64>;
pub type Init = InitResult<f64>;
