use serde::{Deserialize, Serialize};

use super::NormalFormError;
use crate::poly::NormFrame;

/// Barrier widths and radii used along the iteration.
///
/// The barrier shrinks by `shrink` sites per step, `N_s = N − shrink·(s−1)`.
/// The nominal shrink of 20 sites only fits when `N ≥ 40·M_max`; below that
/// it is reduced to `⌊N / (2 M_max)⌋` so that `N_{s+1} ≥ N/2` still holds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub n: u32,
    pub r: f64,
    pub sigma: f64,
    pub m_max: u32,
    pub shrink: u32,
}

impl Schedule {
    pub const NOMINAL_SHRINK: u32 = 20;

    pub fn new(frame: &NormFrame) -> Self {
        let root = (frame.n as f64).sqrt().floor() as u32;
        let by_sqrt = root.saturating_sub(1);
        // keep r − M σ ≥ r/2
        let by_radius = (frame.r / (2.0 * frame.sigma)).floor() as u32;
        let m_max = by_sqrt.min(by_radius);
        let shrink = if m_max == 0 {
            0
        } else {
            Self::NOMINAL_SHRINK.min(frame.n / (2 * m_max))
        };
        Self {
            n: frame.n,
            r: frame.r,
            sigma: frame.sigma,
            m_max,
            shrink,
        }
    }

    /// `N_s`, the barrier half-width whose neighbourhood step `s − 1`
    /// normalizes.
    pub fn n_s(&self, s: u32) -> u32 {
        self.n - self.shrink * s.saturating_sub(1).min(self.m_max + 1)
    }

    /// `r − s σ`: radius at which `H_{s+1}` is measured.
    pub fn radius_after(&self, s: u32) -> f64 {
        self.r - s as f64 * self.sigma
    }

    pub fn check(&self, m: u32) -> Result<(), NormalFormError> {
        if m > self.m_max {
            Err(NormalFormError::ScheduleExceeded { m, m_max: self.m_max })
        } else {
            Ok(())
        }
    }
}
