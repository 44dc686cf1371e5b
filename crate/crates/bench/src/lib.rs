//! Experiment harness for sparse power factorization: Monte-Carlo phase
//! transitions, noise sweeps and file I/O, driven by the `spf` binary.

pub mod demo;
pub mod harness;
pub mod io;
pub mod json;
pub mod spec;

pub use harness::{
    noise_sweep, phase_transition, run_trial, NoiseSweep, PhaseTransition, TrialResult,
};
pub use spec::{Algorithm, Cell, ExperimentSpec, Grid, InitChoice, NoiseSweepSpec, SolverSettings};
