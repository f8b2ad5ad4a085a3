//! Finite-step Birkhoff normal form around the barrier `A(j₀, N)`.
//!
//! Each step solves the homological equation for the low-weight non-resonant
//! terms touching the (shrinking) barrier, conjugates the Hamiltonian by the
//! time-1 flow of the generator as a truncated Lie series, and reads off the
//! modulated frequencies from the new quadratic resonant part.

mod bounds;
mod decomposition;
mod flow;
mod homological;
mod lie;
mod schedule;
mod step;

pub use bounds::{BoundCheck, LemmaConstants};
pub use decomposition::{remainder_decomposition, RemainderParts};
pub use flow::{compose_flows, flow_time_one, FlowOptions};
pub use homological::{divisor, lie_derivative, small_divisor_ratio, solve_homological};
pub use lie::{lie_transform, LieOptions, LieOutcome};
pub use schedule::Schedule;
pub use step::{
    extract_modulated_frequency, initial_norms, normal_form_step, InitialNorms, run_normal_form, NormalFormOptions,
    NormalFormResult, NormalFormStep, StepDiagnostics,
};

use thiserror::Error;

use crate::poly::{MultiIndex, PolyError, Site};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormalFormError {
    #[error("divisor {divisor:e} of {index:?} is below the nonresonance threshold {threshold:e}")]
    ResonantDivisor {
        index: MultiIndex,
        divisor: f64,
        threshold: f64,
    },
    #[error("resonant term {0:?} in the homological right-hand side")]
    ResonantTermInRhs(MultiIndex),
    #[error("Lie series does not converge: {0}")]
    LieSeriesDiverges(String),
    #[error("bound violated: {name}: {lhs:e} > {rhs:e}")]
    BoundViolation { name: String, lhs: f64, rhs: f64 },
    #[error("M = {m} exceeds the admissible number of steps {m_max}")]
    ScheduleExceeded { m: u32, m_max: u32 },
    #[error("non-quadratic or off-diagonal term {0:?} in the diagonal part")]
    MalformedDiagonal(MultiIndex),
    #[error("term {0:?} outside the barrier carries nonzero tail charge")]
    BarrierLeak(MultiIndex),
    #[error("site {0} lies outside the frequency window")]
    OutsideWindow(Site),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}
