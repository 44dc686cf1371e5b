//! Experiment descriptions, read from JSON configs.

use serde::{Deserialize, Serialize};
use spf_core::AdmmConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Spf,
    Pf,
    BpLr,
    BpRs,
    BpRslr,
    BpDs,
    BpDslr,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Spf => "spf",
            Algorithm::Pf => "pf",
            Algorithm::BpLr => "bp-lr",
            Algorithm::BpRs => "bp-rs",
            Algorithm::BpRslr => "bp-rslr",
            Algorithm::BpDs => "bp-ds",
            Algorithm::BpDslr => "bp-dslr",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitChoice {
    #[serde(rename = "optimal")]
    Optimal,
    #[serde(rename = "thresh")]
    Thresholding,
    #[serde(rename = "rowsparse-f")]
    RowSparseFrobenius,
    #[serde(rename = "rowsparse-s")]
    RowSparseSpectral,
    #[serde(rename = "proxy")]
    Proxy,
    /// The true right factor; for diagnostics only.
    #[serde(rename = "oracle")]
    Oracle,
}

/// Inner solver knobs shared by all experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub max_outer: usize,
    pub rel_change_tol: f64,
    pub admm_penalty: f64,
    pub admm_max_iters: usize,
    pub admm_tol: f64,
    pub combinatorial_budget: u64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let admm = AdmmConfig::default();
        Self {
            max_outer: 50,
            rel_change_tol: 1e-8,
            admm_penalty: admm.penalty,
            admm_max_iters: admm.max_iters,
            admm_tol: admm.primal_tol,
            combinatorial_budget: 1_000_000,
        }
    }
}

impl SolverSettings {
    pub fn admm(&self) -> AdmmConfig {
        AdmmConfig {
            penalty: self.admm_penalty,
            max_iters: self.admm_max_iters,
            primal_tol: self.admm_tol,
            dual_tol: self.admm_tol,
        }
    }
}

/// Grid families. Row-sparse grids use `axis1 = s`, `axis2 = n2`; doubly
/// sparse grids use `axis1 = s1`, `axis2 = s2` with `n1 = n2 = n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grid {
    RowSparse {
        n1: usize,
        n2: Vec<usize>,
        s: Vec<usize>,
        m: Vec<usize>,
    },
    DoublySparse {
        n: usize,
        s1: Vec<usize>,
        s2: Vec<usize>,
        m: Vec<usize>,
        /// Only cells with `s1 == s2`.
        #[serde(default)]
        diagonal: bool,
    },
}

/// One grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub axis1: usize,
    pub axis2: usize,
    pub m: usize,
    pub n1: usize,
    pub n2: usize,
    pub s1: usize,
    pub s2: usize,
}

impl Grid {
    /// Cells in output order: `m` outermost, then `axis2`, then `axis1`.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        match self {
            Grid::RowSparse { n1, n2, s, m } => {
                for &mm in m {
                    for &nn2 in n2 {
                        for &ss in s {
                            out.push(Cell {
                                axis1: ss,
                                axis2: nn2,
                                m: mm,
                                n1: *n1,
                                n2: nn2,
                                s1: ss,
                                s2: nn2,
                            });
                        }
                    }
                }
            }
            Grid::DoublySparse {
                n,
                s1,
                s2,
                m,
                diagonal,
            } => {
                for &mm in m {
                    for &b in s2 {
                        for &a in s1 {
                            if *diagonal && a != b {
                                continue;
                            }
                            out.push(Cell {
                                axis1: a,
                                axis2: b,
                                m: mm,
                                n1: *n,
                                n2: *n,
                                s1: a,
                                s2: b,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    fn tag(&self) -> u64 {
        match self {
            Grid::RowSparse { .. } => 1,
            Grid::DoublySparse { .. } => 2,
        }
    }

    pub(crate) fn seed_labels(&self, c: &Cell) -> [u64; 6] {
        [
            self.tag(),
            c.n1 as u64,
            c.n2 as u64,
            c.s1 as u64,
            c.s2 as u64,
            c.m as u64,
        ]
    }
}

fn default_trials() -> usize {
    100
}

fn default_threshold() -> f64 {
    50.0
}

fn default_init() -> InitChoice {
    InitChoice::Thresholding
}

fn default_algorithm() -> Algorithm {
    Algorithm::Spf
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub grid: Grid,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_algorithm")]
    pub algorithm: Algorithm,
    #[serde(default = "default_init")]
    pub init: InitChoice,
    #[serde(default)]
    pub nu: f64,
    #[serde(default = "default_threshold")]
    pub threshold_db: f64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub solver: SolverSettings,
}

/// Noise sweep over `(ν, m / (s1 + s2))` at fixed dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSweepSpec {
    pub n1: usize,
    pub n2: usize,
    pub s1: usize,
    /// Defaults to `n2` (row-sparse signals).
    #[serde(default)]
    pub s2: Option<usize>,
    pub nu: Vec<f64>,
    /// `m = ceil(ratio * (s1 + s2))`.
    pub m_ratio: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_algorithm")]
    pub algorithm: Algorithm,
    #[serde(default = "default_init")]
    pub init: InitChoice,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub solver: SolverSettings,
}

impl NoiseSweepSpec {
    pub fn s2(&self) -> usize {
        self.s2.unwrap_or(self.n2)
    }

    pub fn m_for(&self, ratio: f64) -> usize {
        (ratio * (self.s1 + self.s2()) as f64).ceil() as usize
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> anyhow::Result<()> {
        anyhow::ensure!(self.trials > 0, "trials must be positive");
        anyhow::ensure!(
            self.threshold_db > 0.0,
            "success threshold must be positive"
        );
        anyhow::ensure!(
            self.nu >= 0.0 && self.nu.is_finite(),
            "noise level must be non-negative"
        );
        for c in self.grid.cells() {
            anyhow::ensure!(
                c.m > 0 && c.s1 >= 1 && c.s1 <= c.n1 && c.s2 >= 1 && c.s2 <= c.n2,
                "invalid cell {c:?}"
            );
        }
        Ok(())
    }
}

impl NoiseSweepSpec {
    pub fn validate(&self) -> anyhow::Result<()> {
        anyhow::ensure!(self.trials > 0, "trials must be positive");
        anyhow::ensure!(self.s1 >= 1 && self.s1 <= self.n1, "invalid s1");
        anyhow::ensure!(self.s2() >= 1 && self.s2() <= self.n2, "invalid s2");
        anyhow::ensure!(
            self.nu.iter().all(|v| *v >= 0.0 && v.is_finite()),
            "noise levels must be non-negative"
        );
        anyhow::ensure!(
            self.m_ratio.iter().all(|r| *r > 0.0),
            "m ratios must be positive"
        );
        Ok(())
    }
}
