use serde::{Deserialize, Serialize};

use super::window::{Barrier, Site};
use super::PolyError;

/// Parameters shared by the norms, the nonresonance thresholds and the
/// iteration schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormFrame {
    pub j0: Site,
    /// Barrier half-width `N`.
    pub n: u32,
    /// Weight base, `r > 2`.
    pub r: f64,
    /// Radius lost per step, `0 < σ < r/2`.
    pub sigma: f64,
    /// Nonresonance exponent, `0 < α < 1/100`.
    pub alpha: f64,
    /// Total coupling `ε = ε₁ + ε₂`.
    pub epsilon: f64,
}

impl NormFrame {
    pub fn new(j0: Site, n: u32, r: f64, sigma: f64, alpha: f64, epsilon: f64) -> Result<Self, PolyError> {
        let f = Self {
            j0,
            n,
            r,
            sigma,
            alpha,
            epsilon,
        };
        f.validate()?;
        Ok(f)
    }

    /// Frame with the default loss `σ = r/(2N)`.
    pub fn with_default_sigma(j0: Site, n: u32, r: f64, alpha: f64, epsilon: f64) -> Result<Self, PolyError> {
        let sigma = r / (2.0 * n.max(1) as f64);
        Self::new(j0, n, r, sigma, alpha, epsilon)
    }

    /// Checks the parameter ranges. `ε = 0` is accepted: it is the
    /// uncoupled limit, where every threshold collapses to zero.
    pub fn validate(&self) -> Result<(), PolyError> {
        let bad = |m: String| Err(PolyError::InvalidFrame(m));
        if self.n < 1 {
            return bad("N must be at least 1".into());
        }
        if !(self.r > 2.0) || !self.r.is_finite() {
            return bad(format!("r = {} must exceed 2", self.r));
        }
        if !(self.sigma > 0.0 && self.sigma < self.r / 2.0) {
            return bad(format!("sigma = {} must lie in (0, r/2)", self.sigma));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.01) {
            return bad(format!("alpha = {} must lie in (0, 0.01)", self.alpha));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return bad(format!("epsilon = {} must be non-negative", self.epsilon));
        }
        Ok(())
    }

    pub fn barrier(&self) -> Barrier {
        Barrier::new(self.j0, self.n as i64)
    }

    pub fn barrier_with(&self, half_width: i64) -> Barrier {
        Barrier::new(self.j0, half_width)
    }

    pub fn with_n(&self, n: u32) -> Self {
        Self { n, ..*self }
    }
}
