//! Nonresonance thresholds, admissible small-divisor sets, screening of
//! potentials and Monte Carlo estimates of the resonant measure.

mod enumerate;
mod screen;
mod threshold;

pub use enumerate::enumerate_multiindices;
pub use screen::{
    check_nonresonant, check_nonresonant_with, estimate_resonant_measure, estimate_with, first_screened_realization,
    screen_potential, screening_window, ResonanceReport, ScreenOutcome, Screener, SiteValues, Witness,
};
pub use threshold::nonresonance_threshold;
pub(crate) use threshold::threshold_unchecked;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResonanceError {
    #[error("the zero vector has no threshold")]
    ZeroVector,
}
