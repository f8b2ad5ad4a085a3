//! Sparse algebra of lattice Hamiltonians written as sums of monomials
//! `∏ q_j^{n_j} q̄_j^{n'_j}`.
//!
//! Coefficients carry a complex value together with its sparse gradient with
//! respect to the on-site potential, so that the Lipschitz part of the
//! barrier norms is available exactly at every stage of a normal form
//! computation.

mod bracket;
mod coefficient;
mod eval;
mod frame;
mod hamiltonian;
mod hampoly;
mod multi_index;
mod norms;
pub mod random;
mod text;
mod window;

pub use bracket::{poisson_bracket, raw_bracket};
pub use coefficient::{Coefficient, Grad};
pub use eval::Evaluator;
pub use frame::NormFrame;
pub use hamiltonian::{build_initial_hamiltonian, split_dzr, Couplings, DzrSplit};
pub use hampoly::HamPoly;
pub use multi_index::{DiffVector, Exponent, MultiIndex};
pub use norms::{
    l1_norm, lipschitz_norm, lipschitz_norm_on, restrict_support, triple_norm, triple_norm_on,
    weight_slices, weighted_norm, weighted_norm_on,
};
pub use text::{parse_text, to_text};
pub use window::{Barrier, Site, SiteWindow};

use thiserror::Error;

/// Coefficients whose value and gradient entries all fall below this floor
/// are dropped. It only guards against underflow.
pub const PRUNE_FLOOR: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("invalid window [{lo}, {hi}]")]
    InvalidWindow { lo: i64, hi: i64 },
    #[error("invalid radius {0}: weighted norms need r > 1")]
    InvalidRadius(f64),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("potential does not cover site {0}")]
    MissingSite(Site),
}
