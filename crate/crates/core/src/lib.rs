//! Coarse-to-fine eigenvector preparation for phase estimation.
//!
//! A coarse discretization of a one-dimensional Hermitian eigenproblem is
//! solved classically, its eigenvector is replicated onto a fine grid, and the
//! replicated state is fed to an exactly simulated phase-estimation
//! measurement. The crate is split along those stages:
//!
//! * [`grid`] builds the finite-difference operator on `[0, 1]`.
//! * [`eigen`] is the symmetric tridiagonal eigensolver.
//! * [`state_prep`] replicates coarse vectors and measures their overlap with
//!   the fine eigenbasis.
//! * [`fit`] estimates convergence orders from log-log data.
//! * [`phase_estimation`] computes outcome statistics, collapse and bounds.
//! * [`harness`] drives full experiments and sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod eigen;
pub mod error;
pub mod fit;
pub mod grid;
pub mod harness;
pub mod phase_estimation;
pub mod state_prep;

pub use eigen::{eigensolve, EigenBasis, EigenPair};
pub use error::{ConvergenceDiagnostics, Error, Result};
pub use fit::{failure_scaling_fit, FitResult};
pub use grid::{
    build_grid, discretize, sample_eigenfunction, DiscreteHamiltonian, GridSpec, PotentialSpec,
    SampledFunction,
};
pub use phase_estimation::{
    choose_b, collapse, g_kernel, good_set, good_set_probability, good_set_probability_bound,
    map_eigenvalue_to_phase, outcome_distribution, phase_to_eigenvalue, sample_outcomes,
    statevector_qpe, wrap_distance, CollapseResult, JointState, MappedPhase, OutcomeDistribution,
    PhaseConfig, SpectralInstance,
};
pub use state_prep::{
    overlap_analysis, perturbed_coarse_input, replicate, OverlapReport, StateVector,
};
