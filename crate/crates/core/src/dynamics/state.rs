use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DynamicsError;
use crate::poly::{Site, SiteWindow};
use crate::potential::{purpose, stream};

/// Amplitudes on `[−L, L]` at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeState {
    l: Site,
    pub amps: Vec<C64>,
    pub t: f64,
}

impl LatticeState {
    pub fn new(l: Site, amps: Vec<C64>) -> Result<Self, DynamicsError> {
        if l < 1 {
            return Err(DynamicsError::InvalidArgument(format!("half-width L = {l} must be positive")));
        }
        if amps.len() != 2 * l as usize + 1 {
            return Err(DynamicsError::InvalidArgument(format!(
                "{} amplitudes for a window of {} sites",
                amps.len(),
                2 * l + 1
            )));
        }
        Ok(Self { l, amps, t: 0.0 })
    }

    pub fn zeros(l: Site) -> Result<Self, DynamicsError> {
        Self::new(l, vec![C64::new(0.0, 0.0); 2 * l.max(0) as usize + 1])
    }

    /// Unit mass at `site`.
    pub fn peak(l: Site, site: Site) -> Result<Self, DynamicsError> {
        let mut s = Self::zeros(l)?;
        if site.abs() > l {
            return Err(DynamicsError::InvalidArgument(format!("site {site} outside [-{l}, {l}]")));
        }
        let i = s.index(site);
        s.amps[i] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn half_width(&self) -> Site {
        self.l
    }

    pub fn window(&self) -> SiteWindow {
        SiteWindow::symmetric(self.l).expect("positive half-width")
    }

    pub fn index(&self, site: Site) -> usize {
        (site + self.l) as usize
    }

    pub fn amp(&self, site: Site) -> C64 {
        self.amps[self.index(site)]
    }

    pub fn mass(&self) -> f64 {
        self.amps.iter().map(|q| q.norm_sqr()).sum()
    }

    /// `|q_{−L}|² + |q_L|²`.
    pub fn boundary_mass(&self) -> f64 {
        self.amps[0].norm_sqr() + self.amps[self.amps.len() - 1].norm_sqr()
    }

    /// Multiplies every amplitude by `c`.
    pub fn rotated(&self, c: C64) -> Self {
        Self {
            l: self.l,
            amps: self.amps.iter().map(|q| q * c).collect(),
            t: self.t,
        }
    }
}

/// Initial data for ensemble runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    /// Unit mass at site 0.
    Peak,
    /// Equal moduli on `|j| ≤ j₀`, phases drawn per realization, unit mass.
    Uniform,
}

impl InitialState {
    pub fn build(self, l: Site, j0: Site, master_seed: u64, realization: u64) -> Result<LatticeState, DynamicsError> {
        match self {
            InitialState::Peak => LatticeState::peak(l, 0),
            InitialState::Uniform => {
                let j0 = j0.abs();
                if j0 > l {
                    return Err(DynamicsError::InvalidArgument(format!("j0 = {j0} outside [-{l}, {l}]")));
                }
                let mut s = LatticeState::zeros(l)?;
                let amp = 1.0 / ((2 * j0 + 1) as f64).sqrt();
                let mut rng = stream(master_seed, purpose::INITIAL_STATE, realization);
                for j in -j0..=j0 {
                    let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                    let i = s.index(j);
                    s.amps[i] = C64::from_polar(amp, phase);
                }
                Ok(s)
            }
        }
    }
}

impl std::str::FromStr for InitialState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "peak" => Ok(InitialState::Peak),
            "uniform" => Ok(InitialState::Uniform),
            _ => Err(format!("expected peak or uniform, got {s:?}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_state_is_normalized_and_reproducible() {
        let a = InitialState::Uniform.build(30, 5, 7, 3).unwrap();
        let b = InitialState::Uniform.build(30, 5, 7, 3).unwrap();
        assert_eq!(a, b);
        assert!((a.mass() - 1.0).abs() < 1e-14);
        assert_eq!(a.amp(6), C64::new(0.0, 0.0));
        assert_ne!(a, InitialState::Uniform.build(30, 5, 7, 4).unwrap());
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(LatticeState::new(2, vec![C64::new(0.0, 0.0); 4]).is_err());
    }
}
