//! Constructive tools for long-time Anderson localization of the 1D disordered
//! discrete nonlinear Schrödinger equation
//!
//! ```text
//!     i q̇_j = ε₁ (q_{j-1} + q_{j+1}) + v_j q_j + ε₂ |q_j|² q_j
//! ```
//!
//! The crate is organised in four layers:
//!
//! - [`poly`]: sparse gauge-invariant monomial Hamiltonians with forward-mode
//!   derivatives with respect to the random potential, barrier-weighted norms
//!   and the Poisson bracket.
//! - [`normal_form`]: homological equation, Lie transforms and the iterated
//!   Birkhoff normal form with barrier-shrinking schedule.
//! - [`resonance`]: nonresonance thresholds, admissible multi-index sets,
//!   potential screening and Monte Carlo estimates of the resonant measure.
//! - [`dynamics`]: a unitary Strang splitting integrator for the lattice
//!   equation together with tail-mass and wavefront observables.
//!
//! [`cli`] wires the layers into the `latticebnf` command line tool.

pub mod cli;
pub mod dynamics;
pub mod normal_form;
pub mod poly;
pub mod potential;
pub mod resonance;
pub mod stats;

pub use num_complex::Complex64 as C64;
