//! Split-step integration of the disordered DNLS
//! `i q̇_j = ε₁(q_{j−1} + q_{j+1}) + v_j q_j + ε₂|q_j|² q_j` on `[−L, L]`,
//! with tail-mass and wavefront observables and ensemble statistics.

mod ensemble;
mod evolve;
mod integrator;
mod observe;
mod oracle;
mod state;

pub use ensemble::{
    checkpoint_grid, run_ensemble, run_ensemble_trajectories, summarize, CheckpointStat, EnsembleConfig,
    EnsembleSummary, LogFit, PowerFit, WavefrontFit, POWER_EXPONENTS,
};
pub use evolve::{evolve, EvolveParams, Trajectory, BOUNDARY_ABORT};
pub use integrator::{step_strang, Stepper};
pub use observe::{energy, tail_mass, wavefront};
pub use oracle::dense_linear_propagate;
pub use state::{InitialState, LatticeState};

use thiserror::Error;

use crate::poly::Site;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("window half-width {l} does not exceed j0 + N = {reach}")]
    WindowTooSmall { reach: i64, l: Site },
    #[error("boundary mass exceeded the abort threshold at t = {t}")]
    BoundaryContaminated { t: f64, partial: Box<Trajectory> },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
